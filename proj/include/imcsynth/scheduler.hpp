// Executable observation-based schedulers extracted from a solved game,
// Monte Carlo simulation against concrete environments, and a
// necessary-condition conformance checker for environments.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "imcsynth/closed_reach.hpp"
#include "imcsynth/game.hpp"
#include "imcsynth/solve.hpp"

namespace imcsynth {

struct Decision {
    std::string m_state;
    int coarse = 0;
    std::vector<std::string> targets;  // tau successors of m_state in M
    std::vector<double> weights;
};

struct SchedulerPolicy {
    double kappa = 0.0, delta = 0.0, horizon = 0.0;
    double value = 0.0;
    std::string initial;  // initial M state, part of every observation key
    std::map<std::uint64_t, Decision> decisions;

    // Decision for an observation key; falls back to the first decision
    // recorded for (m_state, coarse), or nullptr.
    const Decision* find(std::uint64_t key, const std::string& m_state, int coarse) const;
};

SchedulerPolicy extract_scheduler(const GameTree& t, const Partition& p, const Solution& sol);

// `.policy` text: two-token header lines, then one line per action:
// `<hash> <M-state> <coarse> <target> <weight>`.
std::string print_policy(const SchedulerPolicy& pol);
SchedulerPolicy parse_policy(const std::string& text);

// How the environment resolves its choices during simulation.
struct EnvPolicy {
    enum class Kind { Uniform, GreedyWorst, Fixed } kind = Kind::Uniform;
    // Fixed: `.sched` text over the composition of M and env, states named
    // "m|e" (env state "none" when simulating a closed M alone).
    std::string schedule;
};

struct SimOptions {
    std::size_t runs = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: hardware concurrency
    std::size_t zeno_guard = 1000000;
};

struct SimResult {
    double estimate = 0.0;
    double half_width = 0.0;  // 95% normal approximation
    std::size_t runs = 0, successes = 0, zeno_aborts = 0;
};

// Simulates M || env with the actions of M hidden. `env` may be empty (no
// states) for a closed M. A null policy makes con choose uniformly.
SimResult simulate(const ImcModel& m, const ImcModel& env, const SchedulerPolicy* policy, const EnvPolicy& envp,
                   const std::vector<int>& goal, double horizon, const SimOptions& opt);

// Samples root-to-leaf paths of the game tree under a behavioral con
// strategy and a pure env strategy.
SimResult simulate_tree(const GameTree& t, const Partition& p, const std::vector<std::vector<double>>& beh,
                        const std::vector<int>& env_choice, std::size_t runs, std::uint64_t seed);

struct ConformanceReport {
    bool relation = false;            // structural items hold on a relation containing the initial pair
    bool statistical = true;          // every Stop-time KS test passed
    std::vector<std::string> failures;
    std::vector<std::string> notes;
    bool pass() const { return relation && statistical; }
};

ConformanceReport conformance_spot_check(const ImcModel& env, const McaSpec& spec, std::size_t samples,
                                         std::uint64_t seed = 1);

}  // namespace imcsynth
