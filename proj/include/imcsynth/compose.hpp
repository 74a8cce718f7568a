// Parallel composition, hiding, specification translation, the barred
// product and the game arena.
#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "imcsynth/distributions.hpp"
#include "imcsynth/model.hpp"

namespace imcsynth {

// Result of a binary composition: the reachable product plus, per state,
// the (lhs, rhs) component pair it was built from.
struct Composed {
    ImcModel model;
    std::vector<std::pair<int, int>> origin;
};

struct ParallelOptions {
    std::set<Label> sync;       // labels that must be taken jointly
    bool barred_sync = false;   // lhs `a` meets rhs `^a` as an env tau; stray `^a` dropped
    std::size_t max_states = static_cast<std::size_t>(-1);
};

// Independent interactive moves of the lhs keep their `controlled` flag;
// everything else comes out uncontrolled.
Composed parallel(const ImcModel& lhs, const ImcModel& rhs, const ParallelOptions& opt);
Composed parallel(const ImcModel& lhs, const ImcModel& rhs, const std::set<std::string>& sync);

ImcModel hide(const ImcModel& m, const std::set<Label>& labels);
ImcModel hide(const ImcModel& m, const std::set<std::string>& actions);

struct TranslateOptions {
    int resolution = 4;
    double horizon = 1.0;
    EntryMode entry = EntryMode::Instantaneous;
};

struct SpecImc {
    ImcModel model;
    std::vector<int> location;          // spec location each state belongs to
    std::vector<PhaseTypeChain> chain;  // per location, empty weights for top flows
};

SpecImc translate_spec(const McaSpec& spec, const TranslateOptions& opt);

// M composed with a translated specification under barred synchronization.
Composed product(const ImcModel& m, const ImcModel& spec_imc);

// Commitment automaton over `actions`; at most 16 actions.
ImcModel commit_imc(const std::vector<std::string>& actions);

enum class StateTag { Immediate, Split, Timed };

struct ArenaOptions {
    TranslateOptions translate;
    std::size_t max_states = 1000000;
};

struct Arena {
    ImcModel model;  // only Change stays visible; tau edges carry provenance
    SpecImc spec;
    ImcModel commit;
    std::vector<std::string> m_names;
    std::vector<int> m_state, spec_state, commit_state;
    std::vector<StateTag> tag;
    std::vector<char> goal;

    bool is_goal(int v) const { return goal[v] != 0; }
    int commit_of(const std::string& name) const { return commit.find_state(name); }
    bool in_now_phase(int v) const { return commit_state[v] == 1; }
};

Arena build_arena(const ImcModel& m, const McaSpec& spec, const ArenaOptions& opt);

// Graphviz rendering: controlled taus blue, env taus red, Change orange,
// Markovian edges black, splits dashed grey.
std::string to_dot(const ImcModel& m);

}  // namespace imcsynth
