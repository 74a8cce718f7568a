#include "imcsynth/compose.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace imcsynth {

namespace {

struct Adjacency {
    std::vector<std::vector<int>> inter, mark, split;
    explicit Adjacency(const ImcModel& m)
        : inter(m.states.size()), mark(m.states.size()), split(m.states.size()) {
        for (std::size_t k = 0; k < m.interactive.size(); ++k) inter[m.interactive[k].src].push_back(int(k));
        for (std::size_t k = 0; k < m.markovian.size(); ++k) mark[m.markovian[k].src].push_back(int(k));
        for (std::size_t k = 0; k < m.splits.size(); ++k) split[m.splits[k].src].push_back(int(k));
    }
};

}  // namespace

Composed parallel(const ImcModel& lhs, const ImcModel& rhs, const ParallelOptions& opt) {
    Composed out;
    ImcModel& m = out.model;
    m.name = lhs.name + "|" + rhs.name;
    for (const auto& a : lhs.actions) m.add_action(a);
    for (const auto& a : rhs.actions) m.add_action(a);
    const Adjacency L(lhs), R(rhs);
    std::set<int> lgoal(lhs.goal.begin(), lhs.goal.end());

    std::map<std::pair<int, int>, int> index;
    auto intern = [&](int s, int t) {
        auto [it, fresh] = index.try_emplace({s, t}, m.num_states());
        if (fresh) {
            if (static_cast<std::size_t>(m.num_states()) >= opt.max_states)
                throw ModelError("composition exceeds state cap of " + std::to_string(opt.max_states));
            m.add_state(lhs.states[s] + "|" + rhs.states[t]);
            out.origin.push_back({s, t});
            if (lgoal.count(s)) m.goal.push_back(it->second);
        }
        return it->second;
    };
    auto synced = [&](const Label& l) { return opt.sync.count(l) > 0; };

    m.initial = intern(lhs.initial, rhs.initial);
    for (int v = 0; v < m.num_states(); ++v) {
        const auto [s, t] = out.origin[v];
        for (int k : L.inter[s]) {
            const Interactive& e = lhs.interactive[k];
            if (synced(e.label)) {
                for (int j : R.inter[t]) {
                    const Interactive& f = rhs.interactive[j];
                    if (f.label == e.label) m.interactive.push_back({v, e.label, intern(e.dst, f.dst), false});
                }
            } else {
                m.interactive.push_back({v, e.label, intern(e.dst, t), e.controlled});
            }
            if (opt.barred_sync && e.label.kind == ActionKind::External) {
                for (int j : R.inter[t]) {
                    const Interactive& f = rhs.interactive[j];
                    if (f.label.kind == ActionKind::Barred && f.label.name == e.label.name)
                        m.interactive.push_back({v, Label::tau(), intern(e.dst, f.dst), false});
                }
            }
        }
        for (int j : R.inter[t]) {
            const Interactive& f = rhs.interactive[j];
            if (synced(f.label)) continue;
            if (opt.barred_sync && f.label.kind == ActionKind::Barred) continue;
            m.interactive.push_back({v, f.label, intern(s, f.dst), false});
        }
        for (int k : L.mark[s]) m.markovian.push_back({v, lhs.markovian[k].rate, intern(lhs.markovian[k].dst, t)});
        for (int j : R.mark[t]) m.markovian.push_back({v, rhs.markovian[j].rate, intern(s, rhs.markovian[j].dst)});
        // Splits are zero-time branching; resolving the lhs first keeps each
        // state's split mass at exactly one.
        if (!L.split[s].empty()) {
            for (int k : L.split[s]) m.splits.push_back({v, lhs.splits[k].prob, intern(lhs.splits[k].dst, t)});
        } else {
            for (int j : R.split[t]) m.splits.push_back({v, rhs.splits[j].prob, intern(s, rhs.splits[j].dst)});
        }
    }
    std::sort(m.goal.begin(), m.goal.end());
    return out;
}

Composed parallel(const ImcModel& lhs, const ImcModel& rhs, const std::set<std::string>& sync) {
    ParallelOptions opt;
    for (const auto& a : sync) opt.sync.insert(Label::external(a));
    return parallel(lhs, rhs, opt);
}

ImcModel hide(const ImcModel& m, const std::set<Label>& labels) {
    ImcModel out = m;
    for (auto& e : out.interactive)
        if (labels.count(e.label)) {
            e.label = Label::tau();
            e.controlled = false;
        }
    std::erase_if(out.actions, [&](const std::string& a) { return labels.count(Label::external(a)) > 0; });
    return out;
}

ImcModel hide(const ImcModel& m, const std::set<std::string>& actions) {
    std::set<Label> l;
    for (const auto& a : actions) l.insert(Label::external(a));
    return hide(m, l);
}

SpecImc translate_spec(const McaSpec& spec, const TranslateOptions& opt) {
    SpecImc out;
    ImcModel& m = out.model;
    m.name = spec.name;
    m.actions = spec.actions;
    for (const auto& loc : spec.locations) {
        m.add_state(loc);
        out.location.push_back(m.num_states() - 1);
    }
    m.initial = spec.initial;
    out.chain.resize(spec.locations.size());
    const auto grid = dominance_grid(opt.horizon);

    // Modal step: may gives a, must gives the barred copy only.
    std::vector<std::vector<Interactive>> modal(spec.locations.size());
    for (const auto& [key, r] : spec.may) {
        if (spec.must.count(key)) continue;
        modal[key.first].push_back({key.first, Label::external(key.second), r, false});
    }
    for (const auto& [key, r] : spec.must) modal[key.first].push_back({key.first, Label::barred(key.second), r, false});

    for (int q = 0; q < spec.num_locations(); ++q) {
        const Flow& f = spec.flow[q];
        const int r = f.target;
        if (f.ctc.top) {
            for (const auto& e : modal[q]) m.interactive.push_back(e);
            if (q != r) m.interactive.push_back({q, Label::now(), r, false});
            continue;
        }
        PhaseTypeChain c = hyper_erlang_fit(f.ctc.dist, opt.resolution, f.ctc.dir, grid, opt.entry);
        out.chain[q] = c;
        const std::string& qn = spec.locations[q];
        auto fresh = [&](const std::string& n) {
            int s = m.add_state(qn + "." + n);
            out.location.push_back(q);
            return s;
        };
        const bool at_least = f.ctc.dir == Direction::AtLeast;
        const auto active = c.active_branches();
        std::vector<int> chain_states{q};
        // Phase states of each active branch; a lone branch starts at q itself.
        std::vector<std::vector<int>> phases;
        for (int j : active) {
            std::vector<int> ph;
            for (int k = 1; k <= j; ++k) {
                if (active.size() == 1 && k == 1) {
                    ph.push_back(q);
                } else {
                    ph.push_back(fresh(std::to_string(j) + "." + std::to_string(k)));
                    chain_states.push_back(ph.back());
                }
            }
            phases.push_back(std::move(ph));
        }
        int sink = r;
        if (at_least) {
            sink = fresh("0");
            chain_states.push_back(sink);
        }
        for (std::size_t b = 0; b < active.size(); ++b) {
            const auto& ph = phases[b];
            for (std::size_t k = 0; k + 1 < ph.size(); ++k) m.markovian.push_back({ph[k], c.branch_rate, ph[k + 1]});
            m.markovian.push_back({ph.back(), c.branch_rate, sink});
            if (active.size() > 1) {
                const double w = c.weights[active[b] - 1];
                if (opt.entry == EntryMode::Markovian)
                    m.markovian.push_back({q, c.entry_rate * w, ph.front()});
                else
                    m.splits.push_back({q, w, ph.front()});
            }
        }
        for (int u : chain_states) {
            for (const auto& e : modal[q]) m.interactive.push_back({u, e.label, e.dst == q ? u : e.dst, false});
            if (!at_least) m.interactive.push_back({u, Label::now(), r, false});
        }
        if (at_least) m.interactive.push_back({sink, Label::now(), r, false});
    }
    return out;
}

Composed product(const ImcModel& m, const ImcModel& spec_imc) {
    ParallelOptions opt;
    for (const auto& a : m.actions) opt.sync.insert(Label::external(a));
    for (const auto& a : spec_imc.actions) opt.sync.insert(Label::external(a));
    opt.barred_sync = true;
    return parallel(m, spec_imc, opt);
}

ImcModel commit_imc(const std::vector<std::string>& actions) {
    if (actions.size() > 16) throw ModelError("commitment automaton supports at most 16 actions");
    ImcModel c;
    c.name = "commit";
    c.actions = actions;
    c.add_state("commit");
    c.add_state("now?");
    const std::size_t n = actions.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::string name = "{";
        bool first = true;
        for (std::size_t k = 0; k < n; ++k)
            if (mask >> k & 1) {
                if (!first) name += ",";
                name += actions[k];
                first = false;
            }
        const int s = c.add_state(name + "}");
        c.interactive.push_back({0, Label::tau(), s, false});
        for (std::size_t k = 0; k < n; ++k)
            if (mask >> k & 1) c.interactive.push_back({s, Label::external(actions[k]), 0, false});
        c.interactive.push_back({s, Label::change(), 1, false});
    }
    c.interactive.push_back({1, Label::tau(), 0, false});
    c.interactive.push_back({1, Label::now(), 0, false});
    c.initial = 0;
    return c;
}

Arena build_arena(const ImcModel& m, const McaSpec& spec, const ArenaOptions& opt) {
    Arena a;
    a.spec = translate_spec(spec, opt.translate);
    Composed prod = product(m, a.spec.model);
    a.commit = commit_imc(m.actions);
    a.m_names = m.states;

    ParallelOptions po;
    for (const auto& x : m.actions) po.sync.insert(Label::external(x));
    po.sync.insert(Label::now());
    po.max_states = opt.max_states;
    Composed full = parallel(prod.model, a.commit, po);
    a.model = hide(full.model, po.sync);
    a.model.name = "arena";

    const int n = a.model.num_states();
    a.m_state.resize(n);
    a.spec_state.resize(n);
    a.commit_state.resize(n);
    a.goal.assign(n, 0);
    std::set<int> goals(m.goal.begin(), m.goal.end());
    for (int v = 0; v < n; ++v) {
        const auto [p, e] = full.origin[v];
        a.m_state[v] = prod.origin[p].first;
        a.spec_state[v] = prod.origin[p].second;
        a.commit_state[v] = e;
        a.goal[v] = goals.count(a.m_state[v]) ? 1 : 0;
    }
    a.model.goal.clear();
    for (int v = 0; v < n; ++v)
        if (a.goal[v]) a.model.goal.push_back(v);

    a.tag.assign(n, StateTag::Timed);
    for (const auto& e : a.model.splits) a.tag[e.src] = StateTag::Split;
    for (const auto& e : a.model.interactive)
        if (e.label.is_tau()) a.tag[e.src] = StateTag::Immediate;
    return a;
}

std::string to_dot(const ImcModel& m) {
    std::ostringstream o;
    o << "digraph \"" << m.name << "\" {\n  rankdir=LR;\n";
    for (int s = 0; s < m.num_states(); ++s) {
        o << "  n" << s << " [label=\"" << m.states[s] << "\"";
        if (std::find(m.goal.begin(), m.goal.end(), s) != m.goal.end()) o << ", peripheries=2";
        if (s == m.initial) o << ", style=bold";
        o << "];\n";
    }
    for (const auto& e : m.interactive) {
        const char* colour = "red";
        if (e.label.is_tau() && e.controlled) colour = "blue";
        else if (e.label.kind == ActionKind::Change) colour = "orange";
        else if (e.label.kind == ActionKind::External) colour = "darkgreen";
        o << "  n" << e.src << " -> n" << e.dst << " [label=\"" << e.label.str() << "\", color=" << colour << "];\n";
    }
    for (const auto& e : m.markovian)
        o << "  n" << e.src << " -> n" << e.dst << " [label=\"" << fmt_double(e.rate) << "\"];\n";
    for (const auto& e : m.splits)
        o << "  n" << e.src << " -> n" << e.dst << " [label=\"[" << fmt_double(e.prob)
          << "]\", style=dashed, color=grey];\n";
    o << "}\n";
    return o.str();
}

}  // namespace imcsynth
