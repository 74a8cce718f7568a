// Sequence-form LP for the discretized game, its solution, and the
// normal-form enumeration oracle used to cross-check it.
#pragma once

#include <string>
#include <vector>

#include "imcsynth/game.hpp"
#include "imcsynth/simplex.hpp"

namespace imcsynth {

struct SequenceFormLP {
    LpProblem lp;
    int num_sequences = 0;          // x variables come first
    int num_env_vars = 0;
    std::vector<std::pair<int, double>> root;  // objective expression
    std::vector<std::pair<int, double>> all_nodes;  // secondary objective
    std::size_t canonical_nodes = 0;           // after hash-consing
};

SequenceFormLP build_lp(const GameTree& t, const Partition& p);

struct Solution {
    double value = 0.0;
    std::vector<double> realization;  // per sequence
    std::vector<int> env_best;        // per node: chosen child index, -1 off env nodes
    double certificate_gap = 0.0;
    std::size_t pivots = 0;
    int lp_rows = 0, lp_cols = 0;
};

struct SolveOptions {
    double tol = 1e-9;
    bool tie_break = true;  // second LP keeping the value, maximizing all node values
};

Solution solve_lp(const GameTree& t, const Partition& p, const SequenceFormLP& lp, const SolveOptions& opt = {});

// Behavioral strategy of con from a realization plan: per cell, one
// probability per action. Cells whose parent sequence has zero weight get
// the uniform distribution.
std::vector<std::vector<double>> behavioral(const Partition& p, const std::vector<double>& realization);

// Env's pure best response against a behavioral con strategy, smallest
// child index on ties, plus the resulting root value.
std::vector<int> env_best_response(const GameTree& t, const Partition& p,
                                   const std::vector<std::vector<double>>& beh, double* value = nullptr);

// Value of the game by enumerating pure strategies (each side capped at
// `cap`) and solving the resulting matrix game.
double normal_form_oracle(const GameTree& t, const Partition& p, std::size_t cap = 4096);

std::string dump_lp(const SequenceFormLP& lp);

}  // namespace imcsynth
