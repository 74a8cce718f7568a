// Domain types for interactive Markov chains and modal continuous-time
// automata, plus the textual formats and structural validation.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace imcsynth {

enum class ActionKind : std::uint8_t { External, Tau, Barred, Now, Change };

// An action label. `name` is empty for tau, Now and Change.
struct Label {
    ActionKind kind = ActionKind::Tau;
    std::string name;

    static Label tau() { return {ActionKind::Tau, {}}; }
    static Label now() { return {ActionKind::Now, {}}; }
    static Label change() { return {ActionKind::Change, {}}; }
    static Label external(std::string n) { return {ActionKind::External, std::move(n)}; }
    static Label barred(std::string n) { return {ActionKind::Barred, std::move(n)}; }

    bool is_tau() const { return kind == ActionKind::Tau; }
    std::string str() const;
    auto operator<=>(const Label&) const = default;
};

// `controlled` marks internal moves of the component whose choices the
// synthesized scheduler resolves. Composition keeps the flag only for the
// left operand's independent moves.
struct Interactive {
    int src = 0;
    Label label;
    int dst = 0;
    bool controlled = false;
    bool operator==(const Interactive&) const = default;
};

struct Markovian {
    int src = 0;
    double rate = 0.0;
    int dst = 0;
    bool operator==(const Markovian&) const = default;
};

// Instantaneous probabilistic branching. Only produced internally by the
// phase-type entry construction; user models cannot contain it.
struct Split {
    int src = 0;
    double prob = 0.0;
    int dst = 0;
    bool operator==(const Split&) const = default;
};

struct ImcModel {
    std::string name = "model";
    std::vector<std::string> states;
    std::vector<std::string> actions;  // external alphabet, declaration order
    std::vector<Interactive> interactive;
    std::vector<Markovian> markovian;
    std::vector<Split> splits;
    int initial = 0;
    std::vector<int> goal;

    int num_states() const { return static_cast<int>(states.size()); }
    int add_state(std::string n);
    int find_state(const std::string& n) const;  // -1 when absent
    void add_action(const std::string& a);
    bool has_action(const std::string& a) const;
    double exit_rate(int s) const;
    bool is_closed() const;

    bool operator==(const ImcModel&) const = default;
};

// ---- distributions and constraints ----

struct ErlangBranch {
    double weight = 1.0;
    int k = 1;
    double rate = 1.0;
    bool operator==(const ErlangBranch&) const = default;
};

struct Distribution {
    enum class Kind : std::uint8_t { Exponential, Erlang, HyperErlang };
    Kind kind = Kind::Exponential;
    std::vector<ErlangBranch> branches;  // always populated, one entry for Exp/Erlang

    static Distribution exponential(double rate);
    static Distribution erlang(int k, double rate);
    static Distribution hyper_erlang(std::vector<ErlangBranch> b);
    std::string str() const;
    bool operator==(const Distribution&) const = default;
};

enum class Direction : std::uint8_t { AtMost, AtLeast };  // "<=" and ">="

struct TimeConstraint {
    bool top = true;
    Direction dir = Direction::AtMost;
    Distribution dist;
    std::string str() const;
    bool operator==(const TimeConstraint&) const = default;
};

struct Flow {
    TimeConstraint ctc;
    int target = 0;
    bool operator==(const Flow&) const = default;
};

struct McaSpec {
    std::string name = "spec";
    std::vector<std::string> locations;
    std::vector<std::string> actions;
    int initial = 0;
    std::map<std::pair<int, std::string>, int> may;
    std::map<std::pair<int, std::string>, int> must;
    std::vector<Flow> flow;  // one per location

    int num_locations() const { return static_cast<int>(locations.size()); }
    int add_location(std::string n);
    int find_location(const std::string& n) const;
    void add_action(const std::string& a);
    bool operator==(const McaSpec&) const = default;
};

// Single location, may self-loops on every action, unconstrained flow.
McaSpec permissive_spec(const std::vector<std::string>& actions);

// ---- errors and validation ----

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(int l, int c, const std::string& msg);
};

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationOptions {
    double max_exit_rate = 1e6;
    bool allow_internal_labels = false;  // barred, Now, Change, splits
    // Environment models may loop on external actions; only tau and split
    // cycles are rejected then.
    bool external_cycles_ok = false;
};

struct ValidationReport {
    std::vector<std::string> issues;
    bool closed = false;
    bool markovian_cycles_ok = true;
    std::vector<int> offending_cycle;  // interactive-only cycle, if any
    bool ok() const { return issues.empty(); }
};

ValidationReport validate(const ImcModel& m, const ValidationOptions& opt = {});
std::vector<std::string> validate(const McaSpec& s);

// Returns an interactive-only cycle (state ids, first repeated at the end is
// omitted) or an empty vector when the zero-time subgraph is acyclic.
std::vector<int> find_interactive_cycle(const ImcModel& m, bool skip_external = false);

// Topological order of states over the zero-time subgraph (interactive and
// split edges). Throws ModelError on a cycle.
std::vector<int> zero_time_topological_order(const ImcModel& m);

struct ParseOptions {
    bool allow_internal_labels = false;
    bool external_cycles_ok = false;
    double max_exit_rate = 1e6;
};

ImcModel parse_imc(const std::string& text, const ParseOptions& opt = {});
McaSpec parse_mca(const std::string& text);
std::string print_imc(const ImcModel& m);
std::string print_mca(const McaSpec& s);

ImcModel load_imc(const std::string& path, const ParseOptions& opt = {});
McaSpec load_mca(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Locale-independent shortest round-trip formatting of a double.
std::string fmt_double(double v);

}  // namespace imcsynth
