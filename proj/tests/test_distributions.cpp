#include <doctest.h>

#include <cmath>
#include <random>

#include "imcsynth/distributions.hpp"

using namespace imcsynth;

namespace {

// Test-side oracle: Erlang CDF by Simpson integration of its density,
// written from the closed form rather than the library's series.
double erlang_cdf_oracle(int k, double rate, double t) {
    if (t <= 0) return 0.0;
    auto f = [&](double x) { return std::pow(rate, k) * std::pow(x, k - 1) * std::exp(-rate * x) / std::tgamma(k); };
    const int n = 20000;
    const double h = t / n;
    double s = f(0) + f(t);
    for (int j = 1; j < n; ++j) s += (j % 2 ? 4 : 2) * f(j * h);
    return s * h / 3;
}

}  // namespace

TEST_CASE("exponential CDF matches the closed form") {
    const auto d = Distribution::exponential(2);
    for (double t : {0.0, 0.1, 0.5, 1.0, 1.5, 4.0}) CHECK(cdf(d, t) == doctest::Approx(1 - std::exp(-2 * t)).epsilon(1e-14));
    CHECK(cdf(d, -1) == 0.0);
    CHECK(mean(d) == doctest::Approx(0.5));
}

TEST_CASE("Erlang CDF agrees with numerical integration") {
    for (int k : {1, 2, 3, 7}) {
        for (double rate : {0.5, 1.0, 4.0}) {
            for (double t : {0.05, 0.7, 2.0, 9.0}) {
                CAPTURE(k);
                CAPTURE(rate);
                CAPTURE(t);
                CHECK(erlang_cdf(k, rate, t) == doctest::Approx(erlang_cdf_oracle(k, rate, t)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("Erlang CDF stays accurate for long chains and tiny times") {
    // Leading term of the series: (rt)^k / k!
    const double t = 1e-3;
    CHECK(erlang_cdf(5, 1.0, t) == doctest::Approx(std::pow(t, 5) / 120).epsilon(1e-6));
    CHECK(erlang_cdf(200, 1.0, 400.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(erlang_cdf(200, 1.0, 1.0) >= 0.0);
}

TEST_CASE("hyper-Erlang CDF is the weighted mixture") {
    const auto d = Distribution::hyper_erlang({{0.25, 1, 2.0}, {0.75, 3, 1.0}});
    for (double t : {0.2, 1.0, 3.0})
        CHECK(cdf(d, t) == doctest::Approx(0.25 * (1 - std::exp(-2 * t)) + 0.75 * erlang_cdf_oracle(3, 1.0, t)));
    CHECK(mean(d) == doctest::Approx(0.25 * 0.5 + 0.75 * 3.0));
}

TEST_CASE("density bounds dominate sampled densities") {
    for (const auto& d : {Distribution::exponential(3), Distribution::erlang(2, 1.5), Distribution::erlang(5, 2),
                          Distribution::hyper_erlang({{0.5, 1, 1.0}, {0.5, 4, 3.0}})}) {
        CAPTURE(d.str());
        const double fs = density_sup(d), ds = density_derivative_sup(d);
        for (int j = 1; j <= 4000; ++j) {
            const double t = j * 0.0025;
            CHECK(pdf(d, t) <= fs * (1 + 1e-12));
            const double h = 1e-6;
            CHECK(std::abs(pdf(d, t + h) - pdf(d, t - h)) / (2 * h) <= ds * (1 + 1e-6) + 1e-6);
        }
    }
}

TEST_CASE("sampling reproduces the mean and the CDF") {
    std::mt19937_64 rng(11);
    const auto d = Distribution::erlang(3, 2.0);
    const int n = 200000;
    double sum = 0;
    int below = 0;
    for (int k = 0; k < n; ++k) {
        const double x = sample(d, rng);
        sum += x;
        below += x <= 1.0;
    }
    CHECK(sum / n == doctest::Approx(1.5).epsilon(0.01));
    CHECK(static_cast<double>(below) / n == doctest::Approx(cdf(d, 1.0)).epsilon(0.01));
}

TEST_CASE("dominance grid has 1025 sorted points on [0, 4T] including T") {
    auto g = dominance_grid(1.3);
    CHECK(g.size() == 1025);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(5.2));
    CHECK(std::find(g.begin(), g.end(), 1.3) != g.end());
}

TEST_CASE("exponential targets are reproduced exactly") {
    const auto g = dominance_grid(1.0);
    for (auto dir : {Direction::AtMost, Direction::AtLeast}) {
        auto c = hyper_erlang_fit(Distribution::exponential(2), 4, dir, g);
        CHECK(c.exact);
        CHECK(sup_distance(c, Distribution::exponential(2), g) < 1e-12);
    }
}

TEST_CASE("fits either dominate in the required direction or report a genuine violation") {
    const auto g = dominance_grid(1.0);
    int succeeded = 0;
    for (const auto& d : {Distribution::erlang(2, 1.0), Distribution::erlang(3, 4.0),
                          Distribution::hyper_erlang({{0.3, 1, 1.0}, {0.7, 2, 2.0}})}) {
        for (int i : {1, 2, 4, 6, 8}) {
            for (auto dir : {Direction::AtMost, Direction::AtLeast}) {
                CAPTURE(d.str());
                CAPTURE(i);
                CAPTURE(static_cast<int>(dir));
                PhaseTypeChain c;
                try {
                    c = hyper_erlang_fit(d, i, dir, g);
                } catch (const FitError& e) {
                    CHECK(e.violation > kDominanceTol);
                    continue;
                }
                ++succeeded;
                double s = 0;
                for (double w : c.weights) {
                    CHECK(w >= 0.0);
                    s += w;
                }
                CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
                // Independent check of the stored chain against the target.
                for (double t : g) {
                    if (dir == Direction::AtMost) CHECK(c.cdf(t) >= cdf(d, t) - kDominanceTol);
                    else CHECK(c.cdf(t) <= cdf(d, t) + kDominanceTol);
                }
            }
        }
    }
    CHECK(succeeded >= 15);
}

TEST_CASE("a single fast phase cannot sit below an Erlang CDF near zero") {
    // Any weight on the one-phase branch grows linearly at 0 while Erlang(2)
    // grows quadratically, so resolution 1 must fail in the >= direction.
    CHECK_THROWS_AS(hyper_erlang_fit(Distribution::erlang(2, 1.0), 1, Direction::AtLeast, dominance_grid(1.0)),
                    FitError);
}

TEST_CASE("an Erlang target whose rate equals the branch rate is reproduced") {
    // Branch rate is sqrt(i); at i = 4 it is 2, so Erlang(2, 2) is branch 2 itself.
    const auto g = dominance_grid(1.0);
    const auto d = Distribution::erlang(2, 2.0);
    for (auto dir : {Direction::AtMost, Direction::AtLeast}) {
        auto c = hyper_erlang_fit(d, 4, dir, g);
        CHECK(c.branch_rate == 2.0);
        CHECK(sup_distance(c, d, g) < 1e-9);
    }
}

TEST_CASE("phase-type chain IMC view has one state per phase") {
    auto c = hyper_erlang_fit(Distribution::erlang(2, 1.0), 3, Direction::AtMost, dominance_grid(1.0));
    auto m = c.to_imc();
    int phases = 0;
    for (int j : c.active_branches()) phases += j;
    CHECK(m.num_states() == phases + 2);
    CHECK(m.find_state("1") >= 0);
    CHECK(m.find_state("0") >= 0);
}
