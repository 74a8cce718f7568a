// Discretization of the controller/environment arena into a finite
// partial-observation game tree, plus con's observation partition.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "imcsynth/compose.hpp"

namespace imcsynth {

enum class NodeKind : std::uint8_t { Con, Env, Chance, Terminal };
enum class Phase : std::uint8_t { SlotStart, SlotStartChanged, MidSlot, AlmostEnd };

// Env edge codes; non-negative env codes are arena target states of env taus.
inline constexpr int kApprove = -1;
inline constexpr int kZero = -2;
inline constexpr int kAlmost = -3;
inline constexpr int kFull = -4;
// Chance edge code for "no jump in this slot"; jumps use arena targets.
inline constexpr int kNoJump = -5;

struct GameNode {
    NodeKind kind = NodeKind::Terminal;
    Phase phase = Phase::SlotStart;
    bool fired = false;  // a Markovian jump already happened in this slot
    int arena = 0;
    int slot = 0;
    int parent = -1;
    int first_child = 0;
    int num_children = 0;
    int obs = -1;  // observation history id (con nodes)
    double payoff = 0.0;
};

// Observed event: an M-state change, or one of con's own choices.
struct ObsEvent {
    bool con_action = false;
    int from = 0, to = 0;  // M states
    int coarse = 0;
    auto operator<=>(const ObsEvent&) const = default;
};

struct ObservationTrie {
    std::vector<int> parent{-1};
    std::vector<ObsEvent> event{ObsEvent{}};
    std::map<std::pair<int, ObsEvent>, int> index;

    int extend(int node, const ObsEvent& e);
    std::vector<ObsEvent> path(int node) const;
};

struct GameQuery {
    double horizon = 1.0;
    int steps = 1;          // N, so kappa = horizon / N
    int coarse = 1;         // n, so delta = n * kappa
    bool full_observation = false;
    bool collapse = true;   // replace con-free subtrees by their exact values
    std::size_t max_nodes = 10000000;
};

struct GameTree {
    std::vector<GameNode> nodes;
    std::vector<int> child;    // per edge
    std::vector<double> prob;  // chance edges; 1 elsewhere
    std::vector<int> action;   // per edge, see codes above; con edges hold M targets
    ObservationTrie trie;
    const Arena* arena = nullptr;
    double horizon = 0.0, kappa = 0.0;
    int steps = 0, coarse = 1;
    bool full_observation = false;
    std::size_t collapsed = 0;  // terminals standing in for con-free subtrees

    int root() const { return 0; }
    int child_of(int node, int k) const { return child[nodes[node].first_child + k]; }
    std::string action_name(int node, int k) const;
};

// Reads IMC_SYNTH_MAX_NODES when set.
std::size_t default_max_nodes();

GameTree discretize(const Arena& arena, const GameQuery& q);

struct Cell {
    int obs = -1;
    int coarse = 0;
    int m_state = 0;
    std::vector<int> actions;   // M targets, ascending
    std::vector<int> members;   // con nodes
    int parent_seq = 0;         // 0 is the empty sequence
    int first_seq = 0;          // sequences first_seq .. first_seq + |actions| - 1
};

struct Partition {
    std::vector<Cell> cells;
    std::vector<int> cell_of;  // per node, -1 for non-con
    int num_sequences = 1;
    std::vector<int> seq_of;           // per node: con's last sequence on the path
    std::vector<int> seq_parent_cell;  // per sequence, -1 for the empty one
};

// Groups con nodes by observation; throws ModelError on action-set mismatch
// or a perfect-recall violation.
Partition observation_partition(const GameTree& t);

// Observation event with M states given by name, as seen outside the tree.
struct NamedObsEvent {
    bool con_action = false;
    std::string from, to;
    int coarse = 0;
};

// 64-bit FNV-1a over the observed history (M-state names), versioned obs-v1.
std::uint64_t observation_hash(const std::string& initial, const std::vector<NamedObsEvent>& events, int coarse);
std::uint64_t observation_hash(const GameTree& t, int obs, int coarse);

std::string dump_tree(const GameTree& t);
std::string dump_partition(const Partition& p);

// Expected payoff of a pure strategy pair; strategies give the chosen child
// index per cell (con) and per env node.
double evaluate_pure(const GameTree& t, const Partition& p, const std::vector<int>& con_choice,
                     const std::vector<int>& env_choice);

}  // namespace imcsynth
