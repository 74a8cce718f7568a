#include "imcsynth/closed_reach.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace imcsynth {

int Schedule::lookup(int s, int j) const {
    auto it = choice.find(s);
    if (it == choice.end() || it->second.empty()) return -1;
    const auto& v = it->second;
    if (v.size() == 1) return v[0];
    return v[std::clamp<std::size_t>(static_cast<std::size_t>(std::max(j, 0)), 0, v.size() - 1)];
}

double max_exit_rate(const ImcModel& m) {
    std::vector<double> r(m.states.size(), 0.0);
    for (const auto& e : m.markovian) r[e.src] += e.rate;
    return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

int required_steps(double max_rate, double horizon, double epsilon, double kappa_request) {
    if (!(epsilon > 0)) throw ModelError("epsilon must be positive");
    const double lt = max_rate * horizon;
    double n = std::ceil(lt * lt / (2.0 * epsilon));
    if (kappa_request > 0) n = std::max(n, std::ceil(horizon / kappa_request - 1e-9));
    if (n > 2e9) throw ModelError("step count overflow");
    return std::max(1, static_cast<int>(n));
}

namespace {

struct Structure {
    std::vector<std::vector<int>> tau;                   // distinct tau successors, ascending
    std::vector<std::vector<std::pair<double, int>>> split;
    std::vector<std::vector<std::pair<double, int>>> jump;  // (rate, target)
    std::vector<double> rate;
    std::vector<int> order;  // zero-time states, successors first
    std::vector<char> goal;
};

Structure analyse(const ImcModel& m, const std::vector<int>& goal) {
    if (!m.is_closed()) throw ModelError("model is not closed: external actions remain");
    const int n = m.num_states();
    Structure st;
    st.tau.resize(n);
    st.split.resize(n);
    st.jump.resize(n);
    st.rate.assign(n, 0.0);
    st.goal.assign(n, 0);
    for (int g : goal) {
        if (g < 0 || g >= n) throw ModelError("goal state out of range");
        st.goal[g] = 1;
    }
    for (const auto& e : m.interactive) st.tau[e.src].push_back(e.dst);
    for (auto& v : st.tau) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (const auto& e : m.splits) st.split[e.src].push_back({e.prob, e.dst});
    for (const auto& e : m.markovian) {
        st.jump[e.src].push_back({e.rate, e.dst});
        st.rate[e.src] += e.rate;
    }
    auto topo = zero_time_topological_order(m);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
        if (!st.goal[*it] && (!st.tau[*it].empty() || !st.split[*it].empty())) st.order.push_back(*it);
    return st;
}

// One backward sweep. `pick` resolves tau choices and may record them.
template <class Pick>
std::vector<double> sweep(const Structure& st, int steps, double kappa, Pick&& pick,
                          std::vector<std::vector<double>>* keep) {
    const int n = static_cast<int>(st.rate.size());
    std::vector<double> next(n, 0.0), cur(n, 0.0);
    std::vector<double> stay(n), go(n);
    for (int s = 0; s < n; ++s) {
        stay[s] = std::exp(-st.rate[s] * kappa);
        go[s] = -std::expm1(-st.rate[s] * kappa);
    }
    auto resolve = [&](std::vector<double>& u, int j) {
        for (int s : st.order) {
            if (!st.tau[s].empty()) {
                u[s] = u[pick(s, j, u)];
            } else {
                double acc = 0.0;
                for (auto [p, t] : st.split[s]) acc += p * u[t];
                u[s] = acc;
            }
        }
    };
    for (int s = 0; s < n; ++s) next[s] = st.goal[s] ? 1.0 : 0.0;
    resolve(next, steps);
    if (keep) (*keep)[steps] = next;
    for (int j = steps - 1; j >= 0; --j) {
        for (int s = 0; s < n; ++s) {
            if (st.goal[s]) {
                cur[s] = 1.0;
                continue;
            }
            double v = stay[s] * next[s];
            if (st.rate[s] > 0) {
                double acc = 0.0;
                for (auto [r, t] : st.jump[s]) acc += r * next[t];
                v += go[s] * acc / st.rate[s];
            }
            cur[s] = v;
        }
        resolve(cur, j);
        if (keep) (*keep)[j] = cur;
        std::swap(cur, next);
    }
    return next;
}

}  // namespace

ClosedResult closed_value(const ImcModel& m, const std::vector<int>& goal, double horizon, double epsilon,
                          const ClosedOptions& opt) {
    if (!(horizon >= 0)) throw ModelError("horizon must be non-negative");
    const Structure st = analyse(m, goal);
    const int steps = opt.steps > 0 ? opt.steps : required_steps(max_exit_rate(m), horizon, epsilon, opt.kappa_request);
    ClosedResult res;
    res.table.steps = steps;
    res.table.kappa = horizon / steps;
    res.table.schedule.steps = steps;
    std::vector<std::vector<int>*> rec(m.states.size(), nullptr);
    std::map<int, std::vector<char>> tied;  // every successor had the same value
    if (opt.record_schedule)
        for (int s : st.order)
            if (st.tau[s].size() > 1) {
                auto& v = res.table.schedule.choice[s];
                v.assign(steps + 1, -1);
                rec[s] = &v;
                tied[s].assign(steps + 1, 0);
            }
    const bool maximise = opt.direction == Optimize::Max;
    auto pick = [&](int s, int j, const std::vector<double>& u) {
        int best = st.tau[s][0];
        for (int t : st.tau[s])
            if (maximise ? u[t] > u[best] : u[t] < u[best]) best = t;
        if (rec[s]) {
            (*rec[s])[j] = best;
            tied[s][j] = std::all_of(st.tau[s].begin(), st.tau[s].end(), [&](int t) { return u[t] == u[best]; });
        }
        return best;
    };
    if (opt.keep_table) res.table.values.assign(steps + 1, {});
    res.table.initial = sweep(st, steps, res.table.kappa, pick, opt.keep_table ? &res.table.values : nullptr);
    // A choice that is optimal at every step collapses to a wildcard entry.
    for (auto& [s, v] : res.table.schedule.choice) {
        const auto& tie = tied[s];
        int c = v[0];
        for (std::size_t j = 0; j < v.size(); ++j)
            if (!tie[j]) {
                c = v[j];
                break;
            }
        bool constant = true;
        for (std::size_t j = 0; j < v.size() && constant; ++j) constant = v[j] == c || tie[j];
        if (constant) v.assign(1, c);
    }
    res.value = res.table.initial[m.initial];
    return res;
}

double evaluate_scheduler(const ImcModel& m, const std::vector<int>& goal, double horizon, int steps,
                          const Schedule& sched) {
    if (steps < 1) throw ModelError("step count must be positive");
    const Structure st = analyse(m, goal);
    for (int s : st.order) {
        if (st.tau[s].size() < 2) continue;
        auto it = sched.choice.find(s);
        if (it == sched.choice.end() || it->second.empty())
            throw ModelError("schedule is partial: no entry for state " + m.states[s]);
        for (int t : it->second)
            if (!std::binary_search(st.tau[s].begin(), st.tau[s].end(), t))
                throw ModelError("schedule is partial: invalid target at state " + m.states[s]);
    }
    auto pick = [&](int s, int j, const std::vector<double>&) {
        if (st.tau[s].size() < 2) return st.tau[s][0];
        return sched.lookup(s, j);
    };
    return sweep(st, steps, horizon / steps, pick, nullptr)[m.initial];
}

std::string print_schedule(const ImcModel& m, const Schedule& s) {
    std::ostringstream o;
    o << "# state step target\n";
    for (const auto& [state, v] : s.choice) {
        if (v.size() == 1) {
            o << m.states[state] << " * " << m.states[v[0]] << "\n";
            continue;
        }
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[j] >= 0) o << m.states[state] << " " << j << " " << m.states[v[j]] << "\n";
    }
    return o.str();
}

Schedule parse_schedule(const ImcModel& m, const std::string& text) {
    Schedule s;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<int, std::map<int, int>> steps;
    std::map<int, int> wild;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string a, b, c, extra;
        if (!(ls >> a)) continue;
        if (!(ls >> b >> c) || (ls >> extra)) throw ParseError(lineno, 1, "expected 'state step target'");
        const int src = m.find_state(a), dst = m.find_state(c);
        if (src < 0) throw ParseError(lineno, 1, "unknown state '" + a + "'");
        if (dst < 0) throw ParseError(lineno, 1, "unknown state '" + c + "'");
        const bool successor = std::any_of(m.interactive.begin(), m.interactive.end(), [&](const Interactive& e) {
            return e.src == src && e.dst == dst && e.label.is_tau();
        });
        if (!successor) throw ParseError(lineno, 1, "'" + c + "' is not a tau successor of '" + a + "'");
        if (b == "*") {
            wild[src] = dst;
        } else {
            int j = 0;
            try {
                std::size_t used = 0;
                j = std::stoi(b, &used);
                if (used != b.size() || j < 0) throw std::invalid_argument(b);
            } catch (const std::exception&) {
                throw ParseError(lineno, 1, "malformed step '" + b + "'");
            }
            steps[src][j] = dst;
            s.steps = std::max(s.steps, j);
        }
    }
    for (auto [src, dst] : wild) s.choice[src] = {dst};
    for (const auto& [src, byj] : steps) {
        std::vector<int> v(s.steps + 1, -1);
        int last = wild.count(src) ? wild[src] : -1;
        for (int j = 0; j <= s.steps; ++j) {
            auto it = byj.find(j);
            if (it != byj.end()) last = it->second;
            v[j] = last;
        }
        s.choice[src] = std::move(v);
    }
    return s;
}

}  // namespace imcsynth
