#include "imcsynth/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace imcsynth {

std::string Label::str() const {
    switch (kind) {
        case ActionKind::External: return name;
        case ActionKind::Tau: return "tau";
        case ActionKind::Barred: return "^" + name;
        case ActionKind::Now: return "Now";
        case ActionKind::Change: return "Change";
    }
    return "?";
}

int ImcModel::add_state(std::string n) {
    states.push_back(std::move(n));
    return static_cast<int>(states.size()) - 1;
}

int ImcModel::find_state(const std::string& n) const {
    auto it = std::find(states.begin(), states.end(), n);
    return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

void ImcModel::add_action(const std::string& a) {
    if (!has_action(a)) actions.push_back(a);
}

bool ImcModel::has_action(const std::string& a) const {
    return std::find(actions.begin(), actions.end(), a) != actions.end();
}

double ImcModel::exit_rate(int s) const {
    double r = 0.0;
    for (const auto& e : markovian)
        if (e.src == s) r += e.rate;
    return r;
}

bool ImcModel::is_closed() const {
    return std::all_of(interactive.begin(), interactive.end(),
                       [](const Interactive& e) { return e.label.is_tau(); });
}

Distribution Distribution::exponential(double rate) {
    return {Kind::Exponential, {{1.0, 1, rate}}};
}

Distribution Distribution::erlang(int k, double rate) {
    return {Kind::Erlang, {{1.0, k, rate}}};
}

Distribution Distribution::hyper_erlang(std::vector<ErlangBranch> b) {
    return {Kind::HyperErlang, std::move(b)};
}

std::string Distribution::str() const {
    switch (kind) {
        case Kind::Exponential: return "exp(" + fmt_double(branches[0].rate) + ")";
        case Kind::Erlang:
            return "erlang(" + std::to_string(branches[0].k) + "," + fmt_double(branches[0].rate) + ")";
        case Kind::HyperErlang: {
            std::string s = "hypererlang(";
            for (std::size_t i = 0; i < branches.size(); ++i) {
                if (i) s += ";";
                s += fmt_double(branches[i].weight) + "," + std::to_string(branches[i].k) + "," +
                     fmt_double(branches[i].rate);
            }
            return s + ")";
        }
    }
    return "?";
}

std::string TimeConstraint::str() const {
    if (top) return "top";
    return std::string(dir == Direction::AtMost ? "<= " : ">= ") + dist.str();
}

int McaSpec::add_location(std::string n) {
    locations.push_back(std::move(n));
    flow.push_back(Flow{TimeConstraint{}, static_cast<int>(locations.size()) - 1});
    return static_cast<int>(locations.size()) - 1;
}

int McaSpec::find_location(const std::string& n) const {
    auto it = std::find(locations.begin(), locations.end(), n);
    return it == locations.end() ? -1 : static_cast<int>(it - locations.begin());
}

void McaSpec::add_action(const std::string& a) {
    if (std::find(actions.begin(), actions.end(), a) == actions.end()) actions.push_back(a);
}

McaSpec permissive_spec(const std::vector<std::string>& actions) {
    McaSpec s;
    s.name = "top";
    s.add_location("top");
    for (const auto& a : actions) {
        s.add_action(a);
        s.may[{0, a}] = 0;
    }
    return s;
}

ParseError::ParseError(int l, int c, const std::string& msg)
    : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
      line(l),
      column(c) {}

namespace {

std::vector<std::vector<int>> zero_time_successors(const ImcModel& m, bool skip_external = false) {
    std::vector<std::vector<int>> succ(m.states.size());
    for (const auto& e : m.interactive)
        if (!skip_external || e.label.is_tau()) succ[e.src].push_back(e.dst);
    for (const auto& e : m.splits) succ[e.src].push_back(e.dst);
    return succ;
}

bool reserved_name(const std::string& n) { return n == "tau" || n == "Now" || n == "Change"; }

}  // namespace

std::vector<int> find_interactive_cycle(const ImcModel& m, bool skip_external) {
    const auto succ = zero_time_successors(m, skip_external);
    const int n = m.num_states();
    std::vector<int> color(n, 0), parent(n, -1);
    // Iterative DFS; a back edge to a gray vertex closes a cycle.
    for (int root = 0; root < n; ++root) {
        if (color[root]) continue;
        std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
        color[root] = 1;
        while (!stack.empty()) {
            auto& [v, idx] = stack.back();
            if (idx < succ[v].size()) {
                int w = succ[v][idx++];
                if (color[w] == 0) {
                    color[w] = 1;
                    parent[w] = v;
                    stack.push_back({w, 0});
                } else if (color[w] == 1) {
                    std::vector<int> cyc{w};
                    for (int x = v; x != w; x = parent[x]) cyc.push_back(x);
                    std::reverse(cyc.begin() + 1, cyc.end());
                    return cyc;
                }
            } else {
                color[v] = 2;
                stack.pop_back();
            }
        }
    }
    return {};
}

std::vector<int> zero_time_topological_order(const ImcModel& m) {
    const auto succ = zero_time_successors(m);
    const int n = m.num_states();
    std::vector<int> indeg(n, 0);
    for (const auto& s : succ)
        for (int w : s) ++indeg[w];
    std::vector<int> order, queue;
    for (int v = 0; v < n; ++v)
        if (!indeg[v]) queue.push_back(v);
    for (std::size_t h = 0; h < queue.size(); ++h) {
        int v = queue[h];
        order.push_back(v);
        for (int w : succ[v])
            if (--indeg[w] == 0) queue.push_back(w);
    }
    if (static_cast<int>(order.size()) != n) throw ModelError("interactive-only cycle in model " + m.name);
    return order;
}

ValidationReport validate(const ImcModel& m, const ValidationOptions& opt) {
    ValidationReport r;
    const int n = m.num_states();
    auto in_range = [n](int s) { return s >= 0 && s < n; };
    if (n == 0) r.issues.push_back("model has no states");
    if (!in_range(m.initial)) r.issues.push_back("initial state out of range");
    {
        std::set<std::string> seen;
        for (const auto& s : m.states)
            if (!seen.insert(s).second) r.issues.push_back("duplicate state id '" + s + "'");
    }
    for (const auto& a : m.actions)
        if (reserved_name(a)) r.issues.push_back("reserved name '" + a + "' used as external action");
    for (int g : m.goal)
        if (!in_range(g)) r.issues.push_back("goal state out of range");
    for (const auto& e : m.interactive) {
        if (!in_range(e.src) || !in_range(e.dst)) {
            r.issues.push_back("interactive transition endpoint out of range");
            continue;
        }
        switch (e.label.kind) {
            case ActionKind::External:
                if (!m.has_action(e.label.name))
                    r.issues.push_back("action '" + e.label.name + "' missing from alphabet");
                break;
            case ActionKind::Tau: break;
            default:
                if (!opt.allow_internal_labels)
                    r.issues.push_back("label '" + e.label.str() + "' is not allowed in user models");
        }
    }
    for (const auto& e : m.markovian) {
        if (!in_range(e.src) || !in_range(e.dst)) {
            r.issues.push_back("Markovian transition endpoint out of range");
            continue;
        }
        if (!(e.rate > 0.0) || !std::isfinite(e.rate))
            r.issues.push_back("non-positive rate " + fmt_double(e.rate) + " on " + m.states[e.src] + " -> " +
                               m.states[e.dst]);
    }
    if (!m.splits.empty() && !opt.allow_internal_labels)
        r.issues.push_back("probabilistic split edges are not allowed in user models");
    {
        std::vector<double> mass(n, 0.0);
        std::vector<char> has(n, 0);
        for (const auto& e : m.splits) {
            if (!in_range(e.src) || !in_range(e.dst)) {
                r.issues.push_back("split endpoint out of range");
                continue;
            }
            if (!(e.prob > 0.0)) r.issues.push_back("non-positive split probability");
            mass[e.src] += e.prob;
            has[e.src] = 1;
        }
        for (int s = 0; s < n; ++s)
            if (has[s] && std::abs(mass[s] - 1.0) > 1e-9)
                r.issues.push_back("split probabilities at " + m.states[s] + " do not sum to 1");
    }
    if (r.issues.empty()) {
        for (int s = 0; s < n; ++s) {
            double er = m.exit_rate(s);
            if (er > opt.max_exit_rate)
                r.issues.push_back("exit rate " + fmt_double(er) + " at " + m.states[s] + " exceeds bound " +
                                   fmt_double(opt.max_exit_rate));
        }
        r.offending_cycle = find_interactive_cycle(m, opt.external_cycles_ok);
        if (!r.offending_cycle.empty()) {
            r.markovian_cycles_ok = false;
            std::string msg = "interactive-only cycle:";
            for (int s : r.offending_cycle) msg += " " + m.states[s] + " ->";
            msg += " " + m.states[r.offending_cycle.front()];
            r.issues.push_back(msg);
        }
    }
    r.closed = m.is_closed();
    return r;
}

std::vector<std::string> validate(const McaSpec& s) {
    std::vector<std::string> issues;
    const int n = s.num_locations();
    if (n == 0) issues.push_back("specification has no locations");
    if (s.initial < 0 || s.initial >= n) issues.push_back("initial location out of range");
    if (static_cast<int>(s.flow.size()) != n) issues.push_back("flow is not total");
    for (const auto& [key, tgt] : s.must) {
        auto it = s.may.find(key);
        if (it == s.may.end())
            issues.push_back("must transition " + s.locations[key.first] + " -" + key.second +
                             "-> without matching may");
        else if (it->second != tgt)
            issues.push_back("must transition " + s.locations[key.first] + " -" + key.second +
                             "-> disagrees with may target");
    }
    for (const auto& f : s.flow) {
        if (f.target < 0 || f.target >= n) issues.push_back("flow target out of range");
        if (f.ctc.top) continue;
        for (const auto& b : f.ctc.dist.branches)
            if (!(b.rate > 0.0) || b.k < 1 || !(b.weight > 0.0))
                issues.push_back("malformed distribution " + f.ctc.dist.str());
        if (f.ctc.dist.kind == Distribution::Kind::HyperErlang) {
            double w = 0;
            for (const auto& b : f.ctc.dist.branches) w += b.weight;
            if (std::abs(w - 1.0) > 1e-9) issues.push_back("hyper-Erlang weights do not sum to 1");
        }
    }
    return issues;
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write " + path);
    out << content;
}

ImcModel load_imc(const std::string& path, const ParseOptions& opt) { return parse_imc(read_file(path), opt); }
McaSpec load_mca(const std::string& path) { return parse_mca(read_file(path)); }

}  // namespace imcsynth
