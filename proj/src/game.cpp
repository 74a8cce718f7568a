#include "imcsynth/game.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <map>
#include <optional>
#include <sstream>

namespace imcsynth {

int ObservationTrie::extend(int node, const ObsEvent& e) {
    auto [it, fresh] = index.try_emplace({node, e}, static_cast<int>(parent.size()));
    if (fresh) {
        parent.push_back(node);
        event.push_back(e);
    }
    return it->second;
}

std::vector<ObsEvent> ObservationTrie::path(int node) const {
    std::vector<ObsEvent> out;
    for (; node > 0; node = parent[node]) out.push_back(event[node]);
    std::reverse(out.begin(), out.end());
    return out;
}

std::size_t default_max_nodes() {
    if (const char* s = std::getenv("IMC_SYNTH_MAX_NODES")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end != s && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 10000000;
}

namespace {

// Per-state view of the arena used by both the tree builder and the DP.
struct ArenaView {
    const Arena& a;
    int n;
    std::vector<std::vector<std::pair<int, int>>> con;  // (M target, arena target)
    std::vector<std::vector<int>> env;                  // arena targets of env taus
    std::vector<std::vector<int>> tau_all;              // all distinct tau targets
    std::vector<std::vector<std::pair<int, double>>> split;
    std::vector<std::vector<std::pair<int, double>>> jump;  // (target, rate)
    std::vector<double> rate;
    std::vector<int> change;
    std::vector<int> order;  // zero-time states, successors first
    std::vector<char> con_free;

    explicit ArenaView(const Arena& ar) : a(ar), n(ar.model.num_states()) {
        con.resize(n);
        env.resize(n);
        tau_all.resize(n);
        split.resize(n);
        jump.resize(n);
        rate.assign(n, 0.0);
        change.assign(n, -1);
        const auto& m = a.model;
        for (const auto& e : m.interactive) {
            if (e.label.kind == ActionKind::Change) {
                if (change[e.src] < 0) change[e.src] = e.dst;
                continue;
            }
            if (!e.label.is_tau()) continue;
            tau_all[e.src].push_back(e.dst);
            if (e.controlled)
                con[e.src].push_back({a.m_state[e.dst], e.dst});
            else
                env[e.src].push_back(e.dst);
        }
        auto uniq = [](auto& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        for (int v = 0; v < n; ++v) {
            uniq(con[v]);
            uniq(env[v]);
            uniq(tau_all[v]);
        }
        auto add = [](std::vector<std::pair<int, double>>& v, int t, double w) {
            for (auto& [x, y] : v)
                if (x == t) {
                    y += w;
                    return;
                }
            v.push_back({t, w});
        };
        for (const auto& e : m.splits) add(split[e.src], e.dst, e.prob);
        for (const auto& e : m.markovian) {
            add(jump[e.src], e.dst, e.rate);
            rate[e.src] += e.rate;
        }
        for (auto& v : split) std::sort(v.begin(), v.end());
        for (auto& v : jump) std::sort(v.begin(), v.end());

        // Kahn over tau and split edges only; Change edges take time.
        std::vector<int> indeg(n, 0);
        for (int v = 0; v < n; ++v) {
            for (int t : tau_all[v]) ++indeg[t];
            for (auto [t, p] : split[v]) ++indeg[t];
        }
        std::vector<int> q;
        for (int v = 0; v < n; ++v)
            if (!indeg[v]) q.push_back(v);
        for (std::size_t h = 0; h < q.size(); ++h) {
            int v = q[h];
            for (int t : tau_all[v])
                if (--indeg[t] == 0) q.push_back(t);
            for (auto [t, p] : split[v])
                if (--indeg[t] == 0) q.push_back(t);
        }
        if (static_cast<int>(q.size()) != n) throw ModelError("arena has a zero-time cycle");
        for (auto it = q.rbegin(); it != q.rend(); ++it)
            if (a.tag[*it] != StateTag::Timed) order.push_back(*it);

        // States that can still reach a genuine con choice.
        std::vector<std::vector<int>> pred(n);
        auto link = [&](int s, int t) { pred[t].push_back(s); };
        for (const auto& e : m.interactive) link(e.src, e.dst);
        for (const auto& e : m.markovian) link(e.src, e.dst);
        for (const auto& e : m.splits) link(e.src, e.dst);
        std::vector<char> reach(n, 0);
        std::vector<int> stack;
        for (int v = 0; v < n; ++v)
            if (con[v].size() >= 2 && a.tag[v] == StateTag::Immediate && !a.is_goal(v)) {
                reach[v] = 1;
                stack.push_back(v);
            }
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int p : pred[v])
                if (!reach[p] && !a.is_goal(p)) {
                    reach[p] = 1;
                    stack.push_back(p);
                }
        }
        con_free.resize(n);
        for (int v = 0; v < n; ++v) con_free[v] = !reach[v];
    }
};

// Exact values of con-free positions: env minimises, chance averages.
// Only slot-start rows are stored; other phases are rebuilt per slot.
class ConFreeDp {
public:
    ConFreeDp(const ArenaView& view, int steps, double kappa) : v_(view), steps_(steps) {
        stay_.resize(v_.n);
        go_.resize(v_.n);
        for (int s = 0; s < v_.n; ++s) {
            stay_[s] = std::exp(-v_.rate[s] * kappa);
            go_[s] = -std::expm1(-v_.rate[s] * kappa);
        }
        idx_.assign(v_.n, -1);
        for (int s = 0; s < v_.n; ++s)
            if (v_.con_free[s]) {
                idx_[s] = static_cast<int>(members_.size());
                members_.push_back(s);
            }
        // Slot-start rows are kept only every K slots; the rest is
        // recomputed block-wise on demand, so memory grows like sqrt(steps).
        block_ = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(steps) + 1.0))));
        std::vector<double> row(v_.n, 0.0);
        for (int s = 0; s < v_.n; ++s) row[s] = timed_or_goal(s, [](int) { return 0.0; });
        resolve(row);
        std::vector<double> cur = compact(row);
        checkpoint_[steps] = cur;
        for (int j = steps - 1; j >= 0; --j) {
            cur = compact(rows(cur)[3]);
            if (j % block_ == 0) checkpoint_[j] = cur;
        }
    }

    double value(int s, int slot, Phase ph) {
        if (v_.a.is_goal(s)) return 1.0;
        if (ph == Phase::SlotStart || slot >= steps_) return ss(std::min(slot, steps_))[idx_[s]];
        const auto& r = cached(slot);
        return r[ph == Phase::AlmostEnd ? 0 : ph == Phase::MidSlot ? 1 : 2][s];
    }

private:
    template <class F>
    double timed_or_goal(int s, F&& timed) const {
        if (v_.a.is_goal(s)) return 1.0;
        if (v_.a.tag[s] == StateTag::Timed) return timed(s);
        return 0.0;
    }

    void resolve(std::vector<double>& row) const {
        for (int s : v_.order) {
            if (!v_.con_free[s]) continue;
            if (v_.a.is_goal(s)) {
                row[s] = 1.0;
            } else if (v_.a.tag[s] == StateTag::Immediate) {
                double best = 2.0;
                for (int t : v_.tau_all[s]) best = std::min(best, row[t]);
                row[s] = best;
            } else {
                double acc = 0.0;
                for (auto [t, p] : v_.split[s]) acc += p * row[t];
                row[s] = acc;
            }
        }
    }

    std::vector<double> compact(const std::vector<double>& row) const {
        std::vector<double> out(members_.size());
        for (std::size_t k = 0; k < members_.size(); ++k) out[k] = row[members_[k]];
        return out;
    }

    // Compacted slot-start row of slot j.
    const std::vector<double>& ss(int j) {
        if (auto it = checkpoint_.find(j); it != checkpoint_.end()) return it->second;
        const int b = j / block_;
        auto it = blocks_.find(b);
        if (it == blocks_.end()) {
            if (blocks_.size() >= 4) blocks_.erase(blocks_.begin());
            const int lo = b * block_, hi = std::min(lo + block_, steps_);
            std::vector<std::vector<double>> out(hi - lo);
            std::vector<double> cur = checkpoint_.at(hi);
            for (int k = hi - 1; k >= lo; --k) {
                cur = compact(rows(cur)[3]);
                out[k - lo] = cur;
            }
            it = blocks_.emplace(b, std::move(out)).first;
        }
        return it->second[j - b * block_];
    }

    // Rows of one slot from the next slot-start row: almost-end, mid-slot,
    // changed, slot-start.
    std::array<std::vector<double>, 4> rows(const std::vector<double>& following) const {
        std::vector<double> next(v_.n, 0.0);
        for (int s = 0; s < v_.n; ++s)
            if (idx_[s] >= 0) next[s] = following[idx_[s]];
        std::array<std::vector<double>, 4> r;
        for (auto& x : r) x.assign(v_.n, 0.0);
        auto fill = [&](std::vector<double>& row, auto&& timed) {
            for (int s = 0; s < v_.n; ++s)
                if (v_.con_free[s]) row[s] = timed_or_goal(s, timed);
            resolve(row);
        };
        auto& ae = r[0];
        auto& mid = r[1];
        auto& chg = r[2];
        auto& ss = r[3];
        fill(ae, [&](int s) { return next[s]; });
        fill(mid, [&](int s) {
            double full = next[s];
            return v_.change[s] >= 0 ? std::min(ae[v_.change[s]], full) : full;
        });
        std::vector<double> jump(v_.n, 0.0);
        for (int s = 0; s < v_.n; ++s) {
            if (!v_.con_free[s] || v_.rate[s] <= 0) continue;
            double acc = 0.0;
            for (auto [t, w] : v_.jump[s]) acc += w * mid[t];
            jump[s] = go_[s] * acc / v_.rate[s];
        }
        auto almost = [&](int s) { return jump[s] + stay_[s] * ae[v_.change[s]]; };
        auto full = [&](int s) { return jump[s] + stay_[s] * next[s]; };
        fill(chg, [&](int s) { return v_.change[s] >= 0 ? std::min(almost(s), full(s)) : full(s); });
        fill(ss, [&](int s) {
            if (v_.change[s] < 0) return full(s);
            return std::min({chg[v_.change[s]], almost(s), full(s)});
        });
        return r;
    }

    const std::array<std::vector<double>, 4>& cached(int slot) {
        auto it = cache_.find(slot);
        if (it != cache_.end()) return it->second;
        if (cache_.size() > 64) cache_.erase(cache_.begin());
        auto r = rows(ss(slot + 1));
        return cache_.emplace(slot, std::move(r)).first->second;
    }

    const ArenaView& v_;
    int steps_;
    std::vector<double> stay_, go_;
    std::vector<int> idx_, members_;
    int block_ = 1;
    std::map<int, std::vector<double>> checkpoint_;
    std::map<int, std::vector<std::vector<double>>> blocks_;
    std::map<int, std::array<std::vector<double>, 4>> cache_;
};

struct Pos {
    int v = 0, slot = 0;
    Phase phase = Phase::SlotStart;
    bool fired = false;
    int trie = 0;
    int mode = 0;  // kAlmost or kFull for timed chance nodes
};

class Builder {
public:
    Builder(const Arena& a, const GameQuery& q, GameTree& t) : a_(a), q_(q), t_(t), view_(a) {
        if (q.collapse) dp_.emplace(view_, q.steps, t.kappa);
    }

    void run() {
        Pos root{a_.model.initial, 0, Phase::SlotStart, false, 0, 0};
        emit(root);
        while (!work_.empty()) {
            auto [id, p] = work_.front();
            work_.pop_front();
            expand(id, p);
        }
    }

private:
    int coarse(int slot) const { return slot / q_.coarse; }

    Pos move(Pos p, int target, bool con_choice) {
        const int from = a_.m_state[p.v], to = a_.m_state[target];
        if (from != to || con_choice) p.trie = t_.trie.extend(p.trie, {con_choice, from, to, coarse(p.slot)});
        p.v = target;
        p.mode = 0;
        return p;
    }

    int add(NodeKind k, const Pos& p, double payoff = 0.0) {
        if (t_.nodes.size() >= q_.max_nodes)
            throw ModelError("game tree exceeds node cap of " + std::to_string(q_.max_nodes) +
                             " (tree size grows like b^(N*|G|) with N=" + std::to_string(q_.steps) +
                             " slots and " + std::to_string(a_.model.num_states()) +
                             " arena states); raise IMC_SYNTH_MAX_NODES or coarsen kappa");
        GameNode n;
        n.kind = k;
        n.phase = p.phase;
        n.fired = p.fired;
        n.arena = p.v;
        n.slot = p.slot;
        n.obs = p.trie;
        n.payoff = payoff;
        t_.nodes.push_back(n);
        const int id = static_cast<int>(t_.nodes.size()) - 1;
        if (k != NodeKind::Terminal) work_.push_back({id, p});
        return id;
    }

    // Follows forced moves, then creates the node for the resulting position.
    int emit(Pos p) {
        for (;;) {
            const int v = p.v;
            if (a_.is_goal(v)) return add(NodeKind::Terminal, p, 1.0);
            if (dp_ && view_.con_free[v]) {
                ++t_.collapsed;
                return add(NodeKind::Terminal, p, dp_->value(v, p.slot, p.phase));
            }
            switch (a_.tag[v]) {
                case StateTag::Immediate: {
                    const auto& con = view_.con[v];
                    const auto& env = view_.env[v];
                    if (env.empty() && con.size() == 1) {
                        p = move(p, con[0].second, false);
                        continue;
                    }
                    if (con.empty() && env.size() == 1) {
                        p = move(p, env[0], false);
                        continue;
                    }
                    return add(env.empty() ? NodeKind::Con : NodeKind::Env, p);
                }
                case StateTag::Split:
                    if (view_.split[v].size() == 1) {
                        p = move(p, view_.split[v][0].first, false);
                        continue;
                    }
                    return add(NodeKind::Chance, p);
                case StateTag::Timed:
                    if (p.slot >= q_.steps) return add(NodeKind::Terminal, p, 0.0);
                    if (p.phase == Phase::AlmostEnd) {
                        p = Pos{v, p.slot + 1, Phase::SlotStart, false, p.trie, 0};
                        continue;
                    }
                    return add(NodeKind::Env, p);
            }
        }
    }

    // Either a con node or, with a single option, the forced successor.
    int emit_con(const Pos& p) {
        const auto& con = view_.con[p.v];
        if (con.size() == 1) return emit(move(p, con[0].second, false));
        return add(NodeKind::Con, p);
    }

    int emit_timed(Pos p, int mode) {
        const int v = p.v;
        if (view_.rate[v] > 0) {
            p.mode = mode;
            return add(NodeKind::Chance, p);
        }
        return emit(after_no_jump(p, mode));
    }

    Pos after_no_jump(Pos p, int mode) const {
        if (mode == kAlmost) return Pos{view_.change[p.v], p.slot, Phase::AlmostEnd, p.fired, p.trie, 0};
        return Pos{p.v, p.slot + 1, Phase::SlotStart, false, p.trie, 0};
    }

    void expand(int id, const Pos& p) {
        std::vector<std::pair<int, double>> kids;  // (child, prob)
        std::vector<int> acts;
        const int v = p.v;
        const NodeKind kind = t_.nodes[id].kind;
        auto push = [&](int code, int child, double pr = 1.0) {
            acts.push_back(code);
            kids.push_back({child, pr});
        };
        if (kind == NodeKind::Con) {
            const bool choice = view_.con[v].size() >= 2;
            for (auto [c, target] : view_.con[v]) push(c, emit(move(p, target, choice)));
        } else if (kind == NodeKind::Chance && a_.tag[v] == StateTag::Split) {
            for (auto [target, pr] : view_.split[v]) push(target, emit(move(p, target, false)), pr);
        } else if (kind == NodeKind::Chance) {
            const double go = -std::expm1(-view_.rate[v] * t_.kappa);
            for (auto [target, w] : view_.jump[v]) {
                Pos j = move(p, target, false);
                j.phase = Phase::MidSlot;
                j.fired = true;
                push(target, emit(j), go * w / view_.rate[v]);
            }
            push(kNoJump, emit(after_no_jump(p, p.mode)), 1.0 - go);
        } else if (a_.tag[v] == StateTag::Immediate) {
            if (!view_.con[v].empty()) push(kApprove, emit_con(p));
            for (int target : view_.env[v]) push(target, emit(move(p, target, false)));
        } else {
            const bool can_change = view_.change[v] >= 0;
            switch (p.phase) {
                case Phase::SlotStart:
                    if (can_change)
                        push(kZero, emit(Pos{view_.change[v], p.slot, Phase::SlotStartChanged, false, p.trie, 0}));
                    [[fallthrough]];
                case Phase::SlotStartChanged:
                    if (can_change) push(kAlmost, emit_timed(p, kAlmost));
                    push(kFull, emit_timed(p, kFull));
                    break;
                case Phase::MidSlot:
                    if (can_change) push(kAlmost, emit(after_no_jump(p, kAlmost)));
                    push(kFull, emit(after_no_jump(p, kFull)));
                    break;
                case Phase::AlmostEnd: break;
            }
        }
        GameNode& n = t_.nodes[id];
        n.first_child = static_cast<int>(t_.child.size());
        n.num_children = static_cast<int>(kids.size());
        for (std::size_t k = 0; k < kids.size(); ++k) {
            t_.child.push_back(kids[k].first);
            t_.prob.push_back(kids[k].second);
            t_.action.push_back(acts[k]);
            t_.nodes[kids[k].first].parent = id;
        }
    }

    const Arena& a_;
    const GameQuery& q_;
    GameTree& t_;
    ArenaView view_;
    std::optional<ConFreeDp> dp_;
    std::deque<std::pair<int, Pos>> work_;
};

}  // namespace

std::string GameTree::action_name(int node, int k) const {
    const GameNode& n = nodes[node];
    const int code = action[n.first_child + k];
    if (!arena && code >= 0) return (n.kind == NodeKind::Chance ? "->" : "tau->") + std::to_string(code);
    switch (n.kind) {
        case NodeKind::Con: return "tau->" + arena->m_names[code];
        case NodeKind::Chance:
            if (code == kNoJump) return "nojump";
            return "->" + arena->model.states[code];
        case NodeKind::Env:
            switch (code) {
                case kApprove: return "approve";
                case kZero: return "zero";
                case kAlmost: return "almost";
                case kFull: return "full";
                default: return "tau->" + arena->model.states[code];
            }
        case NodeKind::Terminal: break;
    }
    return "?";
}

GameTree discretize(const Arena& arena, const GameQuery& q) {
    if (q.steps < 1) throw ModelError("slot count must be positive");
    if (q.coarse < 1) throw ModelError("clock resolution must be a positive multiple of kappa");
    if (!(q.horizon > 0)) throw ModelError("horizon must be positive");
    GameTree t;
    t.arena = &arena;
    t.horizon = q.horizon;
    t.steps = q.steps;
    t.kappa = q.horizon / q.steps;
    t.coarse = q.coarse;
    t.full_observation = q.full_observation;
    Builder(arena, q, t).run();
    return t;
}

Partition observation_partition(const GameTree& t) {
    Partition p;
    const int n = static_cast<int>(t.nodes.size());
    p.cell_of.assign(n, -1);
    p.seq_parent_cell.push_back(-1);
    std::map<std::pair<int, int>, int> key_to_cell;
    std::vector<int> seq_of(n, 0);
    // Node ids are assigned breadth-first, so parents precede children.
    for (int v = 0; v < n; ++v) {
        const GameNode& node = t.nodes[v];
        if (node.parent >= 0) {
            const GameNode& par = t.nodes[node.parent];
            seq_of[v] = seq_of[node.parent];
            if (par.kind == NodeKind::Con) {
                const Cell& c = p.cells[p.cell_of[node.parent]];
                for (int k = 0; k < par.num_children; ++k)
                    if (t.child[par.first_child + k] == v) seq_of[v] = c.first_seq + k;
            }
        }
        if (node.kind != NodeKind::Con) continue;
        std::vector<int> acts;
        for (int k = 0; k < node.num_children; ++k) acts.push_back(t.action[node.first_child + k]);
        const int co = node.slot / t.coarse;
        std::pair<int, int> key = t.full_observation ? std::pair{-1 - v, co} : std::pair{node.obs, co};
        auto [it, fresh] = key_to_cell.try_emplace(key, static_cast<int>(p.cells.size()));
        if (fresh) {
            Cell c;
            c.obs = node.obs;
            c.coarse = co;
            c.m_state = t.arena ? t.arena->m_state[node.arena] : 0;
            c.actions = acts;
            c.parent_seq = seq_of[v];
            c.first_seq = p.num_sequences;
            p.num_sequences += static_cast<int>(acts.size());
            for (std::size_t k = 0; k < acts.size(); ++k) p.seq_parent_cell.push_back(it->second);
            p.cells.push_back(std::move(c));
        }
        Cell& c = p.cells[it->second];
        if (c.actions != acts)
            throw ModelError("observation cell " + std::to_string(it->second) + " has mismatched action sets");
        if (c.parent_seq != seq_of[v])
            throw ModelError("perfect recall violated at node " + std::to_string(v));
        c.members.push_back(v);
        p.cell_of[v] = it->second;
    }
    p.seq_of = std::move(seq_of);
    return p;
}

std::uint64_t observation_hash(const std::string& initial, const std::vector<NamedObsEvent>& events, int coarse) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    mix("obs-v1");
    mix(initial);
    for (const auto& e : events) {
        mix(e.con_action ? "c" : "m");
        mix(e.from);
        mix(e.to);
        mix(std::to_string(e.coarse));
    }
    mix("@" + std::to_string(coarse));
    return h;
}

std::uint64_t observation_hash(const GameTree& t, int obs, int coarse) {
    if (!t.arena) throw ModelError("observation hash needs an arena-backed tree");
    const auto& names = t.arena->m_names;
    std::vector<NamedObsEvent> ev;
    for (const auto& e : t.trie.path(obs)) ev.push_back({e.con_action, names[e.from], names[e.to], e.coarse});
    return observation_hash(names[t.arena->m_state[t.arena->model.initial]], ev, coarse);
}

std::string dump_tree(const GameTree& t) {
    static const char* kinds[] = {"con", "env", "chance", "terminal"};
    std::ostringstream o;
    o << "# id kind slot arenaState [payoff] children(action:child[@prob])\n";
    for (std::size_t v = 0; v < t.nodes.size(); ++v) {
        const GameNode& n = t.nodes[v];
        o << v << " " << kinds[static_cast<int>(n.kind)] << " " << n.slot << " "
          << (t.arena ? t.arena->model.states[n.arena] : std::to_string(n.arena));
        if (n.kind == NodeKind::Terminal) o << " " << fmt_double(n.payoff);
        for (int k = 0; k < n.num_children; ++k) {
            o << " " << t.action_name(static_cast<int>(v), k) << ":" << t.child[n.first_child + k];
            if (n.kind == NodeKind::Chance) o << "@" << fmt_double(t.prob[n.first_child + k]);
        }
        o << "\n";
    }
    return o.str();
}

std::string dump_partition(const Partition& p) {
    std::ostringstream o;
    for (std::size_t c = 0; c < p.cells.size(); ++c) {
        o << c << ":";
        for (int v : p.cells[c].members) o << " " << v;
        o << "\n";
    }
    return o.str();
}

double evaluate_pure(const GameTree& t, const Partition& p, const std::vector<int>& con_choice,
                     const std::vector<int>& env_choice) {
    std::vector<double> val(t.nodes.size(), 0.0);
    for (int v = static_cast<int>(t.nodes.size()) - 1; v >= 0; --v) {
        const GameNode& n = t.nodes[v];
        switch (n.kind) {
            case NodeKind::Terminal: val[v] = n.payoff; break;
            case NodeKind::Chance: {
                double acc = 0.0;
                for (int k = 0; k < n.num_children; ++k) acc += t.prob[n.first_child + k] * val[t.child[n.first_child + k]];
                val[v] = acc;
                break;
            }
            case NodeKind::Con: val[v] = val[t.child_of(v, con_choice[p.cell_of[v]])]; break;
            case NodeKind::Env: val[v] = val[t.child_of(v, env_choice[v])]; break;
        }
    }
    return val[0];
}

}  // namespace imcsynth
