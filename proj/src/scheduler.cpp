#include "imcsynth/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "imcsynth/compose.hpp"
#include "imcsynth/distributions.hpp"

namespace imcsynth {

const Decision* SchedulerPolicy::find(std::uint64_t key, const std::string& m_state, int coarse) const {
    auto it = decisions.find(key);
    if (it != decisions.end()) return &it->second;
    for (const auto& [k, d] : decisions)
        if (d.m_state == m_state && d.coarse == coarse) return &d;
    return nullptr;
}

SchedulerPolicy extract_scheduler(const GameTree& t, const Partition& p, const Solution& sol) {
    if (!t.arena) throw ModelError("scheduler extraction needs an arena-backed tree");
    if (t.full_observation) throw ModelError("full-observation trees do not define an observation-based scheduler");
    const auto beh = behavioral(p, sol.realization);
    const auto& names = t.arena->m_names;
    SchedulerPolicy pol;
    pol.kappa = t.kappa;
    pol.delta = t.kappa * t.coarse;
    pol.horizon = t.horizon;
    pol.value = sol.value;
    pol.initial = names[t.arena->m_state[t.arena->model.initial]];
    for (std::size_t c = 0; c < p.cells.size(); ++c) {
        const Cell& cell = p.cells[c];
        Decision d;
        d.m_state = names[cell.m_state];
        d.coarse = cell.coarse;
        for (int a : cell.actions) d.targets.push_back(names[a]);
        d.weights = beh[c];
        const auto key = observation_hash(t, cell.obs, cell.coarse);
        auto [it, fresh] = pol.decisions.emplace(key, d);
        if (!fresh && (it->second.m_state != d.m_state || it->second.coarse != d.coarse ||
                       it->second.targets != d.targets))
            throw ModelError("observation key collision between distinct cells");
    }
    return pol;
}

std::string print_policy(const SchedulerPolicy& pol) {
    std::ostringstream o;
    o << "# imc-synth scheduler policy\n";
    o << "format obs-v1\n";
    o << "kappa " << fmt_double(pol.kappa) << "\n";
    o << "delta " << fmt_double(pol.delta) << "\n";
    o << "horizon " << fmt_double(pol.horizon) << "\n";
    o << "value " << fmt_double(pol.value) << "\n";
    o << "initial " << pol.initial << "\n";
    o << "# hash M-state coarse target weight\n";
    char buf[32];
    for (const auto& [key, d] : pol.decisions) {
        std::snprintf(buf, sizeof buf, "%016" PRIx64, key);
        for (std::size_t k = 0; k < d.targets.size(); ++k)
            o << buf << ' ' << d.m_state << ' ' << d.coarse << ' ' << d.targets[k] << ' ' << fmt_double(d.weights[k])
              << "\n";
    }
    return o.str();
}

SchedulerPolicy parse_policy(const std::string& text) {
    SchedulerPolicy pol;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    bool have_format = false;
    auto num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw ParseError(number, 1, "malformed number '" + s + "'");
    };
    while (std::getline(in, line)) {
        ++number;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string w; ls >> w;) tok.push_back(w);
        if (tok.empty()) continue;
        if (tok.size() == 2) {
            if (tok[0] == "format") {
                if (tok[1] != "obs-v1") throw ParseError(number, 1, "unsupported policy format '" + tok[1] + "'");
                have_format = true;
            } else if (tok[0] == "kappa") pol.kappa = num(tok[1]);
            else if (tok[0] == "delta") pol.delta = num(tok[1]);
            else if (tok[0] == "horizon") pol.horizon = num(tok[1]);
            else if (tok[0] == "value") pol.value = num(tok[1]);
            else if (tok[0] == "initial") pol.initial = tok[1];
            else throw ParseError(number, 1, "unknown policy header '" + tok[0] + "'");
            continue;
        }
        if (tok.size() != 5) throw ParseError(number, 1, "expected: <hash> <M-state> <coarse> <target> <weight>");
        char* end = nullptr;
        const std::uint64_t key = std::strtoull(tok[0].c_str(), &end, 16);
        if (tok[0].empty() || *end != '\0') throw ParseError(number, 1, "malformed observation hash '" + tok[0] + "'");
        const int coarse = static_cast<int>(num(tok[2]));
        Decision& d = pol.decisions[key];
        if (d.targets.empty()) {
            d.m_state = tok[1];
            d.coarse = coarse;
        } else if (d.m_state != tok[1] || d.coarse != coarse) {
            throw ParseError(number, 1, "inconsistent entries for observation " + tok[0]);
        }
        d.targets.push_back(tok[3]);
        d.weights.push_back(num(tok[4]));
    }
    if (!have_format) throw ParseError(number, 1, "missing 'format obs-v1' header");
    for (const auto& [key, d] : pol.decisions) {
        double s = 0;
        for (double w : d.weights) {
            if (w < 0) throw ParseError(number, 1, "negative weight in policy");
            s += w;
        }
        if (std::abs(s - 1.0) > 1e-9) throw ParseError(number, 1, "policy weights do not sum to 1");
    }
    return pol;
}

namespace {

struct Side {
    std::vector<std::vector<int>> tau;  // distinct targets, ascending
    std::vector<std::vector<std::pair<std::string, int>>> act;
    std::vector<std::vector<std::pair<double, int>>> jump;
    std::vector<double> rate;
};

Side index_side(const ImcModel& m) {
    const std::size_t n = m.states.size();
    Side s;
    s.tau.resize(n);
    s.act.resize(n);
    s.jump.resize(n);
    s.rate.assign(n, 0.0);
    for (const auto& e : m.interactive) {
        if (e.label.is_tau()) s.tau[e.src].push_back(e.dst);
        else if (e.label.kind == ActionKind::External) s.act[e.src].push_back({e.label.name, e.dst});
    }
    for (auto& v : s.tau) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (const auto& e : m.markovian) {
        s.jump[e.src].push_back({e.rate, e.dst});
        s.rate[e.src] += e.rate;
    }
    return s;
}

std::mt19937_64 run_rng(std::uint64_t seed, std::uint64_t run) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(run >> 32)};
    return std::mt19937_64(seq);
}

int sample_index(const std::vector<double>& w, std::mt19937_64& rng) {
    double total = 0;
    for (double x : w) total += x;
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (u < w[k]) return static_cast<int>(k);
        u -= w[k];
    }
    for (std::size_t k = w.size(); k-- > 0;)
        if (w[k] > 0) return static_cast<int>(k);
    return 0;
}

// Runs `body` once per run index over a thread fan-out. Payoffs are stored
// per run and summed in run order, so results do not depend on the worker count.
template <class Body>
SimResult fan_out(std::size_t runs, std::uint64_t seed, unsigned threads, Body&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(runs, 1)));
    std::vector<double> payoff(runs, 0.0);
    std::vector<char> aborted(runs, 0);
    auto work = [&](unsigned tid) {
        for (std::size_t r = tid; r < runs; r += threads) {
            auto rng = run_rng(seed, r);
            bool ab = false;
            payoff[r] = body(rng, ab);
            aborted[r] = ab;
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(work, k);
    work(0);
    for (auto& th : pool) th.join();
    SimResult res;
    res.runs = runs;
    if (runs == 0) return res;
    double s = 0, s2 = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        s += payoff[r];
        s2 += payoff[r] * payoff[r];
        if (payoff[r] >= 1.0) ++res.successes;
        if (aborted[r]) ++res.zeno_aborts;
    }
    res.estimate = s / static_cast<double>(runs);
    const double var = std::max(0.0, s2 / static_cast<double>(runs) - res.estimate * res.estimate);
    res.half_width = 1.96 * std::sqrt(var / static_cast<double>(runs));
    return res;
}

struct Move {
    bool approve = false;
    int m = 0, e = 0;
};

}  // namespace

SimResult simulate(const ImcModel& m, const ImcModel& env_in, const SchedulerPolicy* policy, const EnvPolicy& envp,
                   const std::vector<int>& goal, double horizon, const SimOptions& opt) {
    if (!(horizon >= 0)) throw ModelError("horizon must be non-negative");
    ImcModel none;
    none.name = "none";
    none.add_state("none");
    const ImcModel& env = env_in.states.empty() ? none : env_in;
    const Side sm = index_side(m), se = index_side(env);
    const std::set<std::string> macts(m.actions.begin(), m.actions.end());
    std::vector<char> is_goal(m.states.size(), 0);
    for (int g : goal) is_goal.at(g) = 1;

    // Closed composition, used by the table-driven adversaries.
    std::map<std::pair<int, int>, int> cid;
    std::vector<std::vector<double>> table;
    double table_kappa = 0;
    Schedule fixed_sched;
    const Schedule* fixed = nullptr;
    if (envp.kind != EnvPolicy::Kind::Uniform) {
        auto comp = parallel(m, env, macts);
        std::set<std::string> all(macts);
        all.insert(env.actions.begin(), env.actions.end());
        const ImcModel closed = hide(comp.model, all);
        for (std::size_t s = 0; s < comp.origin.size(); ++s) cid[comp.origin[s]] = static_cast<int>(s);
        if (envp.kind == EnvPolicy::Kind::Fixed) {
            fixed_sched = parse_schedule(closed, envp.schedule);
            fixed = &fixed_sched;
        }
        if (envp.kind == EnvPolicy::Kind::GreedyWorst) {
            std::vector<int> cgoal;
            for (std::size_t s = 0; s < comp.origin.size(); ++s)
                if (is_goal[comp.origin[s].first]) cgoal.push_back(static_cast<int>(s));
            ClosedOptions co;
            co.steps = 1000;
            co.direction = Optimize::Min;
            co.keep_table = true;
            co.record_schedule = false;
            auto r = closed_value(closed, cgoal, horizon, 1e-3, co);
            table = std::move(r.table.values);
            table_kappa = r.table.kappa;
        } else {
            table_kappa = fixed->steps > 0 ? horizon / fixed->steps : horizon;
        }
    }
    auto step_of = [&](double t) {
        if (!(table_kappa > 0)) return 0;
        return static_cast<int>(std::floor(t / table_kappa));
    };
    auto U = [&](int mi, int ei, double t) {
        auto it = cid.find({mi, ei});
        if (it == cid.end()) return 0.0;
        const int j = std::min<int>(step_of(t), static_cast<int>(table.size()) - 1);
        return table[j][it->second];
    };
    const double kappa = policy && policy->kappa > 0 ? policy->kappa : 0.0;
    const int per = policy && kappa > 0 ? std::max(1, static_cast<int>(std::lround(policy->delta / kappa))) : 1;
    auto coarse_of = [&](double t) { return kappa > 0 ? static_cast<int>(std::floor(t / kappa)) / per : 0; };

    auto body = [&](std::mt19937_64& rng, bool& aborted) -> double {
        int mi = m.initial, ei = env.initial;
        double t = 0;
        std::vector<NamedObsEvent> events;
        std::vector<Move> moves;
        for (std::size_t steps = 0;; ++steps) {
            if (is_goal[mi]) return 1.0;
            if (steps >= opt.zeno_guard) {
                aborted = true;
                return 0.0;
            }
            const auto& con = sm.tau[mi];
            moves.clear();
            if (!con.empty()) moves.push_back({true, mi, ei});
            for (int e2 : se.tau[ei]) moves.push_back({false, mi, e2});
            for (const auto& [a, e2] : se.act[ei]) {
                if (!macts.count(a)) {
                    moves.push_back({false, mi, e2});
                    continue;
                }
                for (const auto& [b, m2] : sm.act[mi])
                    if (a == b) moves.push_back({false, m2, e2});
            }
            if (!moves.empty()) {
                int pick = -1;
                if (moves.size() == 1) {
                    pick = 0;
                } else if (envp.kind == EnvPolicy::Kind::GreedyWorst) {
                    double best = 2.0;
                    for (std::size_t k = 0; k < moves.size(); ++k) {
                        double v;
                        if (moves[k].approve) {
                            v = -1.0;
                            for (int c : con) v = std::max(v, U(c, ei, t));
                        } else {
                            v = U(moves[k].m, moves[k].e, t);
                        }
                        if (v < best - 1e-12) {
                            best = v;
                            pick = static_cast<int>(k);
                        }
                    }
                } else if (fixed) {
                    auto it = cid.find({mi, ei});
                    const int target = it == cid.end() ? -1 : fixed->lookup(it->second, step_of(t));
                    for (std::size_t k = 0; k < moves.size() && pick < 0 && target >= 0; ++k) {
                        if (moves[k].approve) {
                            for (int c : con)
                                if (auto jt = cid.find({c, ei}); jt != cid.end() && jt->second == target)
                                    pick = static_cast<int>(k);
                        } else if (auto jt = cid.find({moves[k].m, moves[k].e}); jt != cid.end() && jt->second == target) {
                            pick = static_cast<int>(k);
                        }
                    }
                }
                if (pick < 0)
                    pick = std::uniform_int_distribution<int>(0, static_cast<int>(moves.size()) - 1)(rng);
                const Move mv = moves[pick];
                if (mv.approve) {
                    int target = con[0];
                    if (con.size() >= 2) {
                        const int c = coarse_of(t);
                        std::vector<double> w(con.size(), 1.0);
                        if (policy) {
                            const Decision* d =
                                policy->find(observation_hash(policy->initial, events, c), m.states[mi], c);
                            if (d) {
                                std::vector<double> dw(con.size(), 0.0);
                                double total = 0;
                                for (std::size_t k = 0; k < d->targets.size(); ++k)
                                    for (std::size_t j = 0; j < con.size(); ++j)
                                        if (m.states[con[j]] == d->targets[k]) {
                                            dw[j] += d->weights[k];
                                            total += d->weights[k];
                                        }
                                if (total > 0) w = dw;
                            }
                        }
                        target = con[sample_index(w, rng)];
                        events.push_back({true, m.states[mi], m.states[target], c});
                    } else if (target != mi) {
                        events.push_back({false, m.states[mi], m.states[target], coarse_of(t)});
                    }
                    mi = target;
                } else {
                    if (mv.m != mi) events.push_back({false, m.states[mi], m.states[mv.m], coarse_of(t)});
                    mi = mv.m;
                    ei = mv.e;
                }
                continue;
            }
            const double R = sm.rate[mi] + se.rate[ei];
            if (!(R > 0)) return 0.0;
            t += std::exponential_distribution<double>(R)(rng);
            if (t > horizon) return 0.0;
            double u = std::uniform_real_distribution<double>(0.0, R)(rng);
            bool done = false;
            for (const auto& [r, dst] : sm.jump[mi]) {
                if (u < r) {
                    if (dst != mi) events.push_back({false, m.states[mi], m.states[dst], coarse_of(t)});
                    mi = dst;
                    done = true;
                    break;
                }
                u -= r;
            }
            if (!done) {
                const auto& j = se.jump[ei];
                std::size_t k = 0;
                while (k + 1 < j.size() && u >= j[k].first) u -= j[k++].first;
                if (!j.empty()) ei = j[k].second;
                else if (!sm.jump[mi].empty()) mi = sm.jump[mi].back().second;
            }
        }
    };
    return fan_out(opt.runs, opt.seed, opt.threads, body);
}

SimResult simulate_tree(const GameTree& t, const Partition& p, const std::vector<std::vector<double>>& beh,
                        const std::vector<int>& env_choice, std::size_t runs, std::uint64_t seed) {
    auto body = [&](std::mt19937_64& rng, bool&) -> double {
        int v = t.root();
        for (;;) {
            const GameNode& n = t.nodes[v];
            int k = 0;
            switch (n.kind) {
                case NodeKind::Terminal: return n.payoff;
                case NodeKind::Con: k = sample_index(beh[p.cell_of[v]], rng); break;
                case NodeKind::Env: k = std::max(0, env_choice[v]); break;
                case NodeKind::Chance: {
                    std::vector<double> w(t.prob.begin() + n.first_child,
                                          t.prob.begin() + n.first_child + n.num_children);
                    k = sample_index(w, rng);
                    break;
                }
            }
            v = t.child_of(v, k);
        }
    };
    return fan_out(runs, seed, 1, body);
}

namespace {

struct Conformance {
    const ImcModel& env;
    const McaSpec& spec;
    Side se;
    std::vector<std::vector<char>> rel;
    std::vector<std::vector<std::string>> why;

    Conformance(const ImcModel& e, const McaSpec& s)
        : env(e), spec(s), se(index_side(e)),
          rel(e.states.size(), std::vector<char>(s.locations.size(), 1)),
          why(e.states.size(), std::vector<std::string>(s.locations.size())) {}

    int may(int q, const std::string& a) const {
        auto it = spec.may.find({q, a});
        return it == spec.may.end() ? -1 : it->second;
    }

    std::string name(int e, int q) const { return "(" + env.states[e] + ", " + spec.locations[q] + ")"; }

    // Modalities of q at a single env state: must actions offered, offered
    // actions allowed by may.
    std::string modal(int x, int q) const {
        for (const auto& [key, tgt] : spec.must) {
            if (key.first != q) continue;
            bool found = false;
            for (const auto& [a, y] : se.act[x]) found = found || a == key.second;
            if (!found) return "must " + key.second + " of " + spec.locations[q] + " not offered by " + env.states[x];
        }
        for (const auto& [a, y] : se.act[x])
            if (may(q, a) < 0) return env.states[x] + " offers " + a + " which " + spec.locations[q] + " does not allow";
        return {};
    }

    // States visited while waiting in q from e before a state related to the
    // flow target is reached; `stop` collects the reached stop states.
    std::vector<int> waiting_region(int e, int q, std::vector<int>& stop, bool& exits) const {
        const int q2 = spec.flow[q].target;
        std::vector<char> seen(env.states.size(), 0);
        std::vector<int> region, todo{e};
        seen[e] = 1;
        exits = false;
        while (!todo.empty()) {
            const int x = todo.back();
            todo.pop_back();
            if (rel[x][q2]) {
                stop.push_back(x);
                continue;
            }
            region.push_back(x);
            auto visit = [&](int y) {
                if (!seen[y]) {
                    seen[y] = 1;
                    todo.push_back(y);
                }
            };
            for (int y : se.tau[x]) visit(y);
            for (const auto& [r, y] : se.jump[x]) visit(y);
            for (const auto& [a, y] : se.act[x]) {
                const int t = may(q, a);
                if (t == q) visit(y);
                else if (t >= 0) exits = true;
            }
        }
        std::sort(region.begin(), region.end());
        std::sort(stop.begin(), stop.end());
        return region;
    }

    std::string check(int e, int q) const {
        for (const auto& [key, tgt] : spec.must) {
            if (key.first != q) continue;
            bool ok = false, offered = false;
            for (const auto& [a, y] : se.act[e]) {
                if (a != key.second) continue;
                offered = true;
                ok = ok || tgt == q || rel[y][tgt];
            }
            if (!offered) return "must " + key.second + " not offered";
            if (!ok) return "must " + key.second + " leads to no state conforming to " + spec.locations[tgt];
        }
        for (const auto& [a, y] : se.act[e]) {
            const int t = may(q, a);
            if (t < 0) return "offers " + a + " which is not allowed by may";
            if (t != q && !rel[y][t]) return "after " + a + ", " + name(y, t) + " does not conform";
        }
        for (int y : se.tau[e])
            if (!rel[y][q]) return "after tau, " + name(y, q) + " does not conform";
        const Flow& f = spec.flow[q];
        if (f.target == q) return {};
        std::vector<int> stop;
        bool exits = false;
        for (int x : waiting_region(e, q, stop, exits))
            if (auto m = modal(x, q); !m.empty()) return "while waiting in " + spec.locations[q] + ": " + m;
        if (stop.empty() && !exits)
            return "waiting in " + spec.locations[q] + " never reaches a state conforming to " +
                   spec.locations[f.target];
        return {};
    }

    // Greatest fixpoint: drop violating pairs until stable.
    void solve() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t e = 0; e < rel.size(); ++e)
                for (std::size_t q = 0; q < rel[e].size(); ++q) {
                    if (!rel[e][q]) continue;
                    auto r = check(static_cast<int>(e), static_cast<int>(q));
                    if (!r.empty()) {
                        rel[e][q] = 0;
                        why[e][q] = r;
                        changed = true;
                    }
                }
        }
    }

    // Stop time under a probe that never synchronizes. For upper bounds the
    // earliest admissible stop (first state related to the flow target) is
    // taken; for lower bounds the latest one, just before the run meets a
    // state breaking the waiting modalities. Infinity when unbounded.
    double probe(int e, int q, std::mt19937_64& rng, double cap) const {
        const int q2 = spec.flow[q].target;
        const bool earliest = spec.flow[q].ctc.dir == Direction::AtMost;
        const double inf = std::numeric_limits<double>::infinity();
        int x = e;
        double t = 0, last = 0;
        for (std::size_t steps = 0; steps < 1000000; ++steps) {
            const bool in_stop = rel[x][q2] != 0;
            if (earliest && in_stop) return t;
            if (!earliest) {
                if (in_stop) last = t;
                if (!modal(x, q).empty()) return last;
            }
            if (!se.tau[x].empty()) {
                x = se.tau[x][std::uniform_int_distribution<std::size_t>(0, se.tau[x].size() - 1)(rng)];
                continue;
            }
            const double R = se.rate[x];
            if (!(R > 0)) return earliest || in_stop ? inf : last;
            t += std::exponential_distribution<double>(R)(rng);
            if (!earliest && in_stop) last = t;
            if (t > cap) return inf;
            double u = std::uniform_real_distribution<double>(0.0, R)(rng);
            std::size_t k = 0;
            while (k + 1 < se.jump[x].size() && u >= se.jump[x][k].first) u -= se.jump[x][k++].first;
            x = se.jump[x][k].second;
        }
        return inf;
    }
};

}  // namespace

ConformanceReport conformance_spot_check(const ImcModel& env, const McaSpec& spec, std::size_t samples,
                                         std::uint64_t seed) {
    ConformanceReport rep;
    for (const auto& issue : validate(spec)) rep.failures.push_back("specification: " + issue);
    if (!rep.failures.empty()) return rep;
    Conformance c(env, spec);
    c.solve();
    const int e0 = env.initial, q0 = spec.initial;
    rep.relation = c.rel[e0][q0] != 0;
    if (!rep.relation) {
        rep.failures.push_back(c.name(e0, q0) + ": " + c.why[e0][q0]);
        // Follow the first broken obligation one level down for context.
        for (std::size_t e = 0; e < c.rel.size(); ++e)
            for (std::size_t q = 0; q < c.rel[e].size(); ++q)
                if (!c.rel[e][q] && (static_cast<int>(e) != e0 || static_cast<int>(q) != q0) &&
                    c.why[e0][q0].find(c.name(static_cast<int>(e), static_cast<int>(q))) != std::string::npos)
                    rep.failures.push_back(c.name(static_cast<int>(e), static_cast<int>(q)) + ": " + c.why[e][q]);
        return rep;
    }

    // Pairs the relation actually relies on, reached from the initial pair.
    std::set<std::pair<int, int>> needed{{e0, q0}};
    std::vector<std::pair<int, int>> todo{{e0, q0}};
    auto need = [&](int e, int q) {
        if (c.rel[e][q] && needed.insert({e, q}).second) todo.push_back({e, q});
    };
    while (!todo.empty()) {
        auto [e, q] = todo.back();
        todo.pop_back();
        for (const auto& [a, y] : c.se.act[e])
            if (int t = c.may(q, a); t >= 0) need(y, t);
        for (int y : c.se.tau[e]) need(y, q);
        if (spec.flow[q].target != q) {
            std::vector<int> stop;
            bool exits = false;
            c.waiting_region(e, q, stop, exits);
            for (int y : stop) need(y, spec.flow[q].target);
        }
    }

    const double critical = 1.36 / std::sqrt(static_cast<double>(std::max<std::size_t>(samples, 1)));
    std::uint64_t stream = 0;
    for (auto [e, q] : needed) {
        const Flow& f = spec.flow[q];
        if (f.ctc.top || f.target == q || samples == 0) continue;
        std::vector<double> xs;
        const double cap = 1000.0 * mean(f.ctc.dist);
        for (std::size_t k = 0; k < samples; ++k) {
            auto rng = run_rng(seed, (stream << 40) | k);
            xs.push_back(c.probe(e, q, rng, cap));
        }
        ++stream;
        std::sort(xs.begin(), xs.end());
        const double n = static_cast<double>(xs.size());
        double d = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (std::isinf(xs[i])) {
                // Runs that never stop only hurt the upper-bound direction.
                if (f.ctc.dir == Direction::AtMost) d = std::max(d, 1.0 - static_cast<double>(i) / n);
                break;
            }
            const double F = cdf(f.ctc.dist, xs[i]);
            if (f.ctc.dir == Direction::AtMost) d = std::max(d, F - static_cast<double>(i) / n);
            else d = std::max(d, static_cast<double>(i + 1) / n - F);
        }
        std::ostringstream note;
        note << "Stop-time test at " << c.name(e, q) << " against " << (f.ctc.dir == Direction::AtMost ? "<= " : ">= ")
             << f.ctc.dist.str() << ": D=" << d << " critical=" << critical << " n=" << samples;
        rep.notes.push_back(note.str());
        if (d > critical) {
            rep.statistical = false;
            rep.failures.push_back(note.str());
        }
    }
    return rep;
}
}  // namespace imcsynth
