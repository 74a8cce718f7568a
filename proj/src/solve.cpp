#include "imcsynth/solve.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <sstream>

namespace imcsynth {

namespace {

using Expr = std::vector<std::pair<int, double>>;

void accumulate(Expr& into, const Expr& e, double w) {
    if (w == 0.0) return;
    for (auto [k, c] : e) into.push_back({k, c * w});
}

void normalise(Expr& e) {
    std::sort(e.begin(), e.end(), [](auto& a, auto& b) { return a.first < b.first; });
    Expr out;
    for (auto [k, c] : e) {
        if (!out.empty() && out.back().first == k)
            out.back().second += c;
        else
            out.push_back({k, c});
    }
    std::erase_if(out, [](auto& p) { return p.second == 0.0; });
    e = std::move(out);
}

std::int64_t bits(double d) { return std::bit_cast<std::int64_t>(d); }

}  // namespace

SequenceFormLP build_lp(const GameTree& t, const Partition& p) {
    SequenceFormLP out;
    out.num_sequences = p.num_sequences;
    const int n = static_cast<int>(t.nodes.size());
    std::vector<int> canon(n, -1);
    std::map<std::vector<std::int64_t>, int> sig_index;
    std::vector<Expr> expr;
    std::vector<std::string> names;
    for (int s = 0; s < p.num_sequences; ++s) names.push_back("x" + std::to_string(s));
    int next_var = p.num_sequences;
    std::vector<LpRow> rows;
    Expr all;

    // Children have larger ids than parents, so a reverse sweep sees them first.
    for (int v = n - 1; v >= 0; --v) {
        const GameNode& node = t.nodes[v];
        std::vector<std::int64_t> sig{static_cast<std::int64_t>(node.kind)};
        if (node.kind == NodeKind::Terminal) {
            sig.push_back(bits(node.payoff));
            sig.push_back(p.seq_of[v]);
        } else if (node.kind == NodeKind::Con) {
            sig.push_back(p.cell_of[v]);
        }
        for (int k = 0; k < node.num_children; ++k) {
            if (node.kind == NodeKind::Chance) sig.push_back(bits(t.prob[node.first_child + k]));
            sig.push_back(canon[t.child[node.first_child + k]]);
        }
        auto [it, fresh] = sig_index.try_emplace(std::move(sig), static_cast<int>(expr.size()));
        canon[v] = it->second;
        if (!fresh) continue;
        Expr e;
        switch (node.kind) {
            case NodeKind::Terminal:
                if (node.payoff != 0.0) e.push_back({p.seq_of[v], node.payoff});
                break;
            case NodeKind::Chance:
                for (int k = 0; k < node.num_children; ++k)
                    accumulate(e, expr[canon[t.child[node.first_child + k]]], t.prob[node.first_child + k]);
                break;
            case NodeKind::Con:
                for (int k = 0; k < node.num_children; ++k) accumulate(e, expr[canon[t.child[node.first_child + k]]], 1.0);
                break;
            case NodeKind::Env: {
                const int y = next_var++;
                names.push_back("y" + std::to_string(v));
                ++out.num_env_vars;
                std::vector<int> seen;
                for (int k = 0; k < node.num_children; ++k) {
                    const int c = canon[t.child[node.first_child + k]];
                    if (std::find(seen.begin(), seen.end(), c) != seen.end()) continue;
                    seen.push_back(c);
                    LpRow r;
                    r.coef.push_back({y, 1.0});
                    accumulate(r.coef, expr[c], -1.0);
                    normalise(r.coef);
                    r.sense = Sense::LE;
                    rows.push_back(std::move(r));
                }
                e.push_back({y, 1.0});
                break;
            }
        }
        normalise(e);
        if (node.kind != NodeKind::Terminal) accumulate(all, e, 1.0);
        expr.push_back(std::move(e));
    }
    out.canonical_nodes = expr.size();
    out.root = n ? expr[canon[0]] : Expr{};
    normalise(all);
    out.all_nodes = std::move(all);

    LpRow origin;
    origin.coef.push_back({0, 1.0});
    origin.sense = Sense::EQ;
    origin.rhs = 1.0;
    rows.push_back(origin);
    for (const Cell& c : p.cells) {
        LpRow r;
        for (std::size_t k = 0; k < c.actions.size(); ++k) r.coef.push_back({c.first_seq + static_cast<int>(k), 1.0});
        r.coef.push_back({c.parent_seq, -1.0});
        r.sense = Sense::EQ;
        rows.push_back(std::move(r));
    }

    out.lp.num_vars = next_var;
    out.lp.names = std::move(names);
    out.lp.rows = std::move(rows);
    out.lp.objective.assign(next_var, 0.0);
    for (auto [k, c] : out.root) out.lp.objective[k] += c;
    return out;
}

std::vector<std::vector<double>> behavioral(const Partition& p, const std::vector<double>& x) {
    std::vector<std::vector<double>> beh;
    for (const Cell& c : p.cells) {
        const std::size_t k = c.actions.size();
        std::vector<double> d(k, 1.0 / static_cast<double>(k));
        const double w = x[c.parent_seq];
        if (w > 1e-12) {
            double sum = 0.0;
            for (std::size_t a = 0; a < k; ++a) sum += d[a] = std::max(0.0, x[c.first_seq + a]);
            if (sum > 0)
                for (double& v : d) v /= sum;
            else
                std::fill(d.begin(), d.end(), 1.0 / static_cast<double>(k));
        }
        beh.push_back(std::move(d));
    }
    return beh;
}

std::vector<int> env_best_response(const GameTree& t, const Partition& p, const std::vector<std::vector<double>>& beh,
                                   double* value) {
    const int n = static_cast<int>(t.nodes.size());
    std::vector<double> val(n, 0.0);
    std::vector<int> choice(n, -1);
    for (int v = n - 1; v >= 0; --v) {
        const GameNode& node = t.nodes[v];
        switch (node.kind) {
            case NodeKind::Terminal: val[v] = node.payoff; break;
            case NodeKind::Chance:
                for (int k = 0; k < node.num_children; ++k) val[v] += t.prob[node.first_child + k] * val[t.child_of(v, k)];
                break;
            case NodeKind::Con: {
                const auto& d = beh[p.cell_of[v]];
                for (int k = 0; k < node.num_children; ++k) val[v] += d[k] * val[t.child_of(v, k)];
                break;
            }
            case NodeKind::Env: {
                int best = 0;
                for (int k = 1; k < node.num_children; ++k)
                    if (val[t.child_of(v, k)] < val[t.child_of(v, best)] - 1e-12) best = k;
                choice[v] = best;
                val[v] = val[t.child_of(v, best)];
                break;
            }
        }
    }
    if (value) *value = n ? val[0] : 0.0;
    return choice;
}

Solution solve_lp(const GameTree& t, const Partition& p, const SequenceFormLP& lp, const SolveOptions& opt) {
    SimplexOptions so;
    so.tol = opt.tol;
    LpResult primary = simplex_solve<double>(lp.lp, so);
    if (primary.status != LpStatus::Optimal)
        throw LpNumericalError(primary.status == LpStatus::Infeasible ? "sequence-form LP infeasible (construction bug)"
                                                                      : "sequence-form LP unbounded (construction bug)");
    Solution sol;
    sol.value = std::clamp(primary.objective, 0.0, 1.0);
    sol.certificate_gap = primary.gap;
    sol.pivots = primary.pivots;
    sol.lp_rows = static_cast<int>(lp.lp.rows.size());
    sol.lp_cols = lp.lp.num_vars;
    std::vector<double> x = primary.x;

    if (opt.tie_break && !lp.all_nodes.empty()) {
        LpProblem second = lp.lp;
        LpRow keep;
        keep.coef = lp.root;
        keep.sense = Sense::GE;
        keep.rhs = primary.objective - 1e-9;
        second.rows.push_back(std::move(keep));
        second.objective.assign(second.num_vars, 0.0);
        for (auto [k, c] : lp.all_nodes) second.objective[k] += c;
        try {
            LpResult r = simplex_solve<double>(second, so);
            if (r.status == LpStatus::Optimal) x = r.x;
            sol.pivots += r.pivots;
        } catch (const LpNumericalError&) {
            // keep the primary plan
        }
    }
    sol.realization.assign(x.begin(), x.begin() + lp.num_sequences);
    sol.env_best = env_best_response(t, p, behavioral(p, sol.realization));
    return sol;
}

double normal_form_oracle(const GameTree& t, const Partition& p, std::size_t cap) {
    std::size_t con_count = 1, env_count = 1;
    std::vector<int> env_nodes;
    for (const Cell& c : p.cells) {
        con_count *= c.actions.size();
        if (con_count > cap) throw ModelError("normal-form oracle: con strategy space exceeds cap");
    }
    for (std::size_t v = 0; v < t.nodes.size(); ++v)
        if (t.nodes[v].kind == NodeKind::Env) {
            env_nodes.push_back(static_cast<int>(v));
            env_count *= static_cast<std::size_t>(t.nodes[v].num_children);
            if (env_count > cap) throw ModelError("normal-form oracle: env strategy space exceeds cap");
        }
    // Mixed-radix decoding of strategy indices.
    auto con_strategy = [&](std::size_t idx) {
        std::vector<int> s(p.cells.size());
        for (std::size_t c = 0; c < p.cells.size(); ++c) {
            const std::size_t k = p.cells[c].actions.size();
            s[c] = static_cast<int>(idx % k);
            idx /= k;
        }
        return s;
    };
    auto env_strategy = [&](std::size_t idx) {
        std::vector<int> s(t.nodes.size(), -1);
        for (int v : env_nodes) {
            const std::size_t k = static_cast<std::size_t>(t.nodes[v].num_children);
            s[v] = static_cast<int>(idx % k);
            idx /= k;
        }
        return s;
    };
    std::vector<std::vector<double>> A(con_count, std::vector<double>(env_count));
    std::vector<std::vector<int>> envs;
    for (std::size_t j = 0; j < env_count; ++j) envs.push_back(env_strategy(j));
    for (std::size_t i = 0; i < con_count; ++i) {
        const auto cs = con_strategy(i);
        for (std::size_t j = 0; j < env_count; ++j) A[i][j] = evaluate_pure(t, p, cs, envs[j]);
    }
    // max v  s.t.  v <= sum_i q_i A[i][j] for all j,  sum_i q_i = 1.
    LpProblem lp;
    const int I = static_cast<int>(con_count);
    lp.num_vars = I + 1;
    lp.objective.assign(lp.num_vars, 0.0);
    lp.objective[I] = 1.0;
    for (std::size_t j = 0; j < env_count; ++j) {
        LpRow r;
        r.coef.push_back({I, 1.0});
        for (int i = 0; i < I; ++i)
            if (A[i][j] != 0.0) r.coef.push_back({i, -A[i][j]});
        lp.rows.push_back(std::move(r));
    }
    LpRow simplex_row;
    for (int i = 0; i < I; ++i) simplex_row.coef.push_back({i, 1.0});
    simplex_row.sense = Sense::EQ;
    simplex_row.rhs = 1.0;
    lp.rows.push_back(std::move(simplex_row));
    LpResult r = simplex_solve<long double>(lp);
    if (r.status != LpStatus::Optimal) throw LpNumericalError("matrix game LP failed");
    return r.objective;
}

std::string dump_lp(const SequenceFormLP& s) {
    std::ostringstream o;
    const LpProblem& lp = s.lp;
    o << "lp-v1\n";
    o << "vars " << lp.num_vars << " rows " << lp.rows.size() << "\n";
    for (int j = 0; j < lp.num_vars; ++j) o << "var " << j << " " << lp.names[j] << " >= 0\n";
    o << "maximize";
    for (int j = 0; j < lp.num_vars; ++j)
        if (lp.objective[j] != 0.0) o << " " << j << ":" << fmt_double(lp.objective[j]);
    o << "\n";
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        const LpRow& r = lp.rows[i];
        o << "row " << i << " " << (r.sense == Sense::LE ? "le" : r.sense == Sense::GE ? "ge" : "eq") << " "
          << fmt_double(r.rhs);
        for (auto [k, c] : r.coef) o << " " << k << ":" << fmt_double(c);
        o << "\n";
    }
    return o.str();
}

}  // namespace imcsynth
