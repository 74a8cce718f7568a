#include "imcsynth/distributions.hpp"

#include <algorithm>
#include <cmath>

namespace imcsynth {

double erlang_cdf(int k, double rate, double t) {
    if (t <= 0) return 0.0;
    const double x = rate * t;
    if (x < k) {
        // Lower tail: e^{-x} * sum_{m>=k} x^m/m!, accurate when the CDF is small.
        double term = std::exp(-x + k * std::log(x) - std::lgamma(k + 1.0));
        double sum = 0.0;
        for (int m = k; m < k + 2000; ++m) {
            sum += term;
            term *= x / (m + 1);
            if (term < 1e-18 * sum) break;
        }
        return std::min(1.0, sum);
    }
    double term = std::exp(-x), sum = 0.0;
    for (int m = 0; m < k; ++m) {
        sum += term;
        term *= x / (m + 1);
    }
    return std::max(0.0, 1.0 - sum);
}

namespace {

double erlang_pdf(int k, double rate, double t) {
    if (t < 0) return 0.0;
    if (t == 0) return k == 1 ? rate : 0.0;
    return std::exp(k * std::log(rate) + (k - 1) * std::log(t) - rate * t - std::lgamma(k));
}

double erlang_pdf_derivative(int k, double rate, double t) {
    if (k == 1) return -rate * rate * std::exp(-rate * t);
    if (t <= 0) return k == 2 ? rate * rate : 0.0;
    // f'(t) = f(t) * ((k-1)/t - rate)
    return erlang_pdf(k, rate, t) * ((k - 1) / t - rate);
}

double erlang_derivative_sup(int k, double rate) {
    if (k <= 2) return rate * rate;
    const double r = std::sqrt(k - 1.0);
    double best = 0.0;
    for (double t : {(k - 1 - r) / rate, (k - 1 + r) / rate}) best = std::max(best, std::abs(erlang_pdf_derivative(k, rate, t)));
    return best;
}

}  // namespace

double cdf(const Distribution& d, double t) {
    double s = 0.0;
    for (const auto& b : d.branches) s += b.weight * erlang_cdf(b.k, b.rate, t);
    return std::clamp(s, 0.0, 1.0);
}

double pdf(const Distribution& d, double t) {
    double s = 0.0;
    for (const auto& b : d.branches) s += b.weight * erlang_pdf(b.k, b.rate, t);
    return s;
}

double mean(const Distribution& d) {
    double s = 0.0;
    for (const auto& b : d.branches) s += b.weight * b.k / b.rate;
    return s;
}

double sample(const Distribution& d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ErlangBranch* pick = &d.branches.back();
    if (d.branches.size() > 1) {
        double r = u(rng), acc = 0.0;
        for (const auto& b : d.branches) {
            acc += b.weight;
            if (r < acc) {
                pick = &b;
                break;
            }
        }
    }
    std::exponential_distribution<double> e(pick->rate);
    double t = 0.0;
    for (int i = 0; i < pick->k; ++i) t += e(rng);
    return t;
}

double density_sup(const Distribution& d) {
    double s = 0.0;
    for (const auto& b : d.branches) {
        double mode = (b.k - 1) / b.rate;
        s += b.weight * erlang_pdf(b.k, b.rate, mode);
    }
    return s;
}

double density_derivative_sup(const Distribution& d) {
    double s = 0.0;
    for (const auto& b : d.branches) s += b.weight * erlang_derivative_sup(b.k, b.rate);
    return s;
}

std::vector<double> dominance_grid(double horizon) {
    std::vector<double> g;
    g.reserve(1025);
    for (int k = 0; k < 1024; ++k) g.push_back(4.0 * horizon * k / 1023.0);
    g.push_back(horizon);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

double PhaseTypeChain::cdf(double t) const {
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j)
        if (weights[j] > 0) s += weights[j] * erlang_cdf(static_cast<int>(j) + 1, branch_rate, t);
    return std::clamp(s, 0.0, 1.0);
}

Distribution PhaseTypeChain::as_distribution() const {
    std::vector<ErlangBranch> b;
    for (std::size_t j = 0; j < weights.size(); ++j)
        if (weights[j] > 0) b.push_back({weights[j], static_cast<int>(j) + 1, branch_rate});
    return Distribution::hyper_erlang(std::move(b));
}

std::vector<int> PhaseTypeChain::active_branches() const {
    std::vector<int> out;
    for (std::size_t j = 0; j < weights.size(); ++j)
        if (weights[j] > 0) out.push_back(static_cast<int>(j) + 1);
    return out;
}

ImcModel PhaseTypeChain::to_imc() const {
    ImcModel m;
    m.name = "phase_type";
    const int entry_state = m.add_state("1");
    const auto active = active_branches();
    std::vector<int> first;
    for (int j : active) {
        int prev = -1;
        for (int k = 1; k <= j; ++k) {
            int s = (active.size() == 1 && k == 1) ? entry_state : m.add_state(std::to_string(j) + "." + std::to_string(k));
            if (k == 1) first.push_back(s);
            if (prev >= 0) m.markovian.push_back({prev, branch_rate, s});
            prev = s;
        }
    }
    const int sink = m.add_state("0");
    for (std::size_t b = 0; b < active.size(); ++b) {
        int j = active[b];
        int last = first[b];
        if (j > 1) last = m.find_state(std::to_string(j) + "." + std::to_string(j));
        m.markovian.push_back({last, branch_rate, sink});
        if (active.size() > 1) {
            double w = weights[j - 1];
            if (entry == EntryMode::Markovian)
                m.markovian.push_back({0, entry_rate * w, first[b]});
            else
                m.splits.push_back({0, w, first[b]});
        }
    }
    m.initial = entry_state;
    return m;
}

double dominance_violation(const PhaseTypeChain& c, const Distribution& d, Direction dir,
                           const std::vector<double>& grid, double* where) {
    double worst = -1.0, at = 0.0;
    for (double t : grid) {
        double diff = dir == Direction::AtLeast ? c.cdf(t) - cdf(d, t) : cdf(d, t) - c.cdf(t);
        if (diff > worst) {
            worst = diff;
            at = t;
        }
    }
    if (where) *where = at;
    return worst;
}

double sup_distance(const PhaseTypeChain& c, const Distribution& d, const std::vector<double>& grid) {
    double s = 0.0;
    for (double t : grid) s = std::max(s, std::abs(c.cdf(t) - cdf(d, t)));
    return s;
}

PhaseTypeChain hyper_erlang_fit(const Distribution& d, int i, Direction dir, const std::vector<double>& grid,
                                EntryMode entry) {
    if (i < 1) throw FitError("resolution must be at least 1", 0, 0);
    PhaseTypeChain c;
    c.resolution = i;
    c.entry = entry;
    c.entry_rate = std::pow(2.0, std::pow(2.0, i));
    if (d.kind == Distribution::Kind::Exponential) {
        c.branch_rate = d.branches[0].rate;
        c.weights = {1.0};
        c.exact = true;
        return c;
    }
    c.branch_rate = std::sqrt(static_cast<double>(i));
    const std::size_t G = grid.size();
    std::vector<double> target(G);
    for (std::size_t g = 0; g < G; ++g) target[g] = cdf(d, grid[g]);
    std::vector<std::vector<double>> E(i + 2, std::vector<double>(G, 0.0));
    for (int j = 1; j <= i; ++j)
        for (std::size_t g = 0; g < G; ++g) E[j][g] = erlang_cdf(j, c.branch_rate, grid[g]);

    // Feasible iff partial + a*E[j] + (m-a)*E[next] dominates the target.
    std::vector<double> partial(G, 0.0);
    auto feasible = [&](int j, int next, double a, double m) {
        for (std::size_t g = 0; g < G; ++g) {
            double f = partial[g] + a * E[j][g] + (m - a) * E[next][g];
            if (dir == Direction::AtMost ? f < target[g] - 1e-14 : f > target[g] + 1e-14) return false;
        }
        return true;
    };
    auto report = [&](int j) {
        double worst = -1, at = 0;
        for (std::size_t g = 0; g < G; ++g) {
            double diff = dir == Direction::AtMost ? target[g] - E[j][g] : E[j][g] - target[g];
            if (diff > worst) worst = diff, at = grid[g];
        }
        throw FitError("hyper-Erlang fit infeasible at resolution " + std::to_string(i) + ": worst violation " +
                           fmt_double(worst) + " at t=" + fmt_double(at),
                       at, worst);
    };

    c.weights.assign(i, 0.0);
    double m = 1.0;
    // Shortest-first for "<=", longest-first for ">="; each weight is pushed
    // to the smallest value that keeps a dominating completion available.
    const int first = dir == Direction::AtMost ? 1 : i;
    const int step = dir == Direction::AtMost ? 1 : -1;
    if (!feasible(first, first, 1.0, 1.0)) report(first);
    for (int j = first; j != first + step * (i - 1); j += step) {
        const int next = j + step;
        double a;
        if (feasible(j, next, 0.0, m)) {
            a = 0.0;
        } else {
            double lo = 0.0, hi = m;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                if (feasible(j, next, mid, m))
                    hi = mid;
                else
                    lo = mid;
            }
            a = hi;
        }
        c.weights[j - 1] = a;
        for (std::size_t g = 0; g < G; ++g) partial[g] += a * E[j][g];
        m -= a;
    }
    c.weights[first + step * (i - 1) - 1] = std::max(0.0, m);
    double total = 0.0;
    for (double& w : c.weights) {
        if (w < 1e-13) w = 0.0;
        total += w;
    }
    for (double& w : c.weights) w /= total;
    double at = 0;
    double viol = dominance_violation(c, d, dir, grid, &at);
    if (viol > kDominanceTol)
        throw FitError("hyper-Erlang fit lost dominance after normalization: " + fmt_double(viol) + " at t=" +
                           fmt_double(at),
                       at, viol);
    return c;
}

}  // namespace imcsynth
