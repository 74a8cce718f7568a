#include <doctest.h>

#include <cmath>
#include <random>

#include "imcsynth/closed_reach.hpp"
#include "support.hpp"

using namespace imcsynth;

namespace {

// Test-side oracle: probability of having reached the goal by time T in a
// CTMC with goal states made absorbing, via uniformization.
double ctmc_reach(const ImcModel& m, const std::vector<int>& goal, double T) {
    const int n = m.num_states();
    std::vector<char> g(n, 0);
    for (int s : goal) g[s] = 1;
    double q = 0;
    for (int s = 0; s < n; ++s)
        if (!g[s]) q = std::max(q, m.exit_rate(s));
    if (q == 0) return g[m.initial] ? 1.0 : 0.0;
    std::vector<double> p(n, 0.0), next(n);
    p[m.initial] = 1.0;
    double weight = std::exp(-q * T), result = 0.0;
    for (int k = 0; k < 2000; ++k) {
        double reached = 0;
        for (int s = 0; s < n; ++s)
            if (g[s]) reached += p[s];
        result += weight * reached;
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            if (g[s]) {
                next[s] += p[s];
                continue;
            }
            next[s] += p[s] * (1 - m.exit_rate(s) / q);
        }
        for (const auto& e : m.markovian)
            if (!g[e.src]) next[e.dst] += p[e.src] * e.rate / q;
        p.swap(next);
        weight *= q * T / (k + 1);
        if (k > q * T && weight < 1e-18) break;
    }
    return result;
}

ImcModel random_ctmc(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> ns(2, 6);
    std::uniform_real_distribution<double> u(0, 1);
    ImcModel m;
    const int n = ns(rng);
    for (int s = 0; s < n; ++s) m.add_state("s" + std::to_string(s));
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
            if (s != t && u(rng) < 0.4) m.markovian.push_back({s, 0.2 + 2.8 * u(rng), t});
    m.goal = {n - 1};
    return m;
}

}  // namespace

TEST_CASE("single rate-2 delay matches 1 - exp(-2T)") {
    auto m = testing::model("rate2.imc");
    for (double T : {0.5, 1.0, 1.5}) {
        const auto r = closed_value(m, m.goal, T, 1e-4);
        CHECK(std::abs(r.value - (1 - std::exp(-2 * T))) <= 1e-4);
        CHECK(r.value <= 1 - std::exp(-2 * T) + 1e-12);
    }
}

TEST_CASE("two delays in sequence match the Erlang(2,2) CDF") {
    auto m = testing::model("two_step.imc");
    const double exact = 1 - std::exp(-3.0) * 4.0;
    CHECK(std::abs(closed_value(m, m.goal, 1.5, 1e-4).value - exact) <= 1e-4);
}

TEST_CASE("maximum and minimum pick the fast and the slow branch") {
    auto m = testing::model("intro_closed.imc");
    ClosedOptions mx, mn;
    mn.direction = Optimize::Min;
    const auto hi = closed_value(m, m.goal, 1.5, 1e-4, mx);
    const auto lo = closed_value(m, m.goal, 1.5, 1e-4, mn);
    CHECK(std::abs(hi.value - (1 - std::exp(-4.5))) <= 1e-4);
    CHECK(std::abs(lo.value - (1 - std::exp(-1.5))) <= 1e-4);
    const int init = m.find_state("init");
    CHECK(hi.table.schedule.lookup(init, 0) == m.find_state("v"));
    CHECK(lo.table.schedule.lookup(init, 0) == m.find_state("u"));
}

TEST_CASE("a choice that is optimal at every step collapses to a wildcard") {
    auto m = testing::model("intro_closed.imc");
    const auto r = closed_value(m, m.goal, 1.5, 1e-3);
    const auto text = print_schedule(m, r.table.schedule);
    CHECK(text.find("init * v") != std::string::npos);
    const auto back = parse_schedule(m, text);
    CHECK(back.lookup(m.find_state("init"), 17) == m.find_state("v"));
}

TEST_CASE("the recorded schedule achieves the optimum on the same grid") {
    for (const char* f : {"intro_closed.imc", "two_step.imc"}) {
        auto m = testing::model(f);
        const auto r = closed_value(m, m.goal, 1.5, 1e-3);
        CHECK(evaluate_scheduler(m, m.goal, 1.5, r.table.steps, r.table.schedule) ==
              doctest::Approx(r.value).epsilon(1e-12));
    }
}

TEST_CASE("a fixed schedule is evaluated, not optimized") {
    auto m = testing::model("intro_closed.imc");
    const auto r = closed_value(m, m.goal, 1.5, 1e-4);
    auto forced = parse_schedule(m, "init * u\n");
    CHECK(std::abs(evaluate_scheduler(m, m.goal, 1.5, r.table.steps, forced) - (1 - std::exp(-1.5))) <= 1e-4);
}

TEST_CASE("time zero: value is the goal indicator after immediate moves") {
    auto m = parse_imc("state a b c\ninitial a\ngoal c\na -tau-> b\na -tau-> c\nb -(1)-> c\n");
    CHECK(closed_value(m, m.goal, 0.0, 1e-3).value == 1.0);
    auto blocked = parse_imc("state a b\ninitial a\ngoal b\na -(1)-> b\n");
    CHECK(closed_value(blocked, blocked.goal, 0.0, 1e-3).value == 0.0);
}

TEST_CASE("goal reached through zero-time moves only counts when chosen") {
    auto m = parse_imc("state a b c\ninitial a\ngoal c\na -tau-> b\na -tau-> c\n");
    ClosedOptions mn;
    mn.direction = Optimize::Min;
    CHECK(closed_value(m, m.goal, 1.0, 1e-3).value == 1.0);
    CHECK(closed_value(m, m.goal, 1.0, 1e-3, mn).value == 0.0);
}

TEST_CASE("required steps shrink the truncation below epsilon") {
    const int n = required_steps(2.0, 1.0, 1e-3);
    const double kappa = 1.0 / n;
    // Per-step error of the one-jump kernel is at most (b kappa)^2 / 2.
    CHECK(n * std::pow(2.0 * kappa, 2) / 2 <= 1e-3 * (1 + 1e-9));
    CHECK(required_steps(2.0, 1.0, 1e-3, 1e-4) >= 10000);
}

TEST_CASE("random CTMCs agree with uniformization within epsilon") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 60; ++k) {
        auto m = random_ctmc(rng);
        const double T = 0.5 + k % 3;
        const double exact = ctmc_reach(m, m.goal, T);
        const double got = closed_value(m, m.goal, T, 1e-3).value;
        CAPTURE(print_imc(m));
        CHECK(std::abs(got - exact) <= 1e-3);
    }
}

TEST_CASE("max value dominates every stationary schedule") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int k = 0; k < 200 && checked < 40; ++k) {
        auto m = testing::random_imc(rng, 5, 0, true);
        std::vector<int> choosers;
        for (int s = 0; s < m.num_states(); ++s)
            for (const auto& e : m.interactive)
                if (e.src == s && e.label.is_tau()) {
                    choosers.push_back(s);
                    break;
                }
        if (choosers.empty()) continue;
        ++checked;
        const auto best = closed_value(m, m.goal, 1.0, 1e-3);
        ClosedOptions mn;
        mn.direction = Optimize::Min;
        const auto worst = closed_value(m, m.goal, 1.0, 1e-3, mn);
        // First tau successor everywhere, then the last.
        for (int variant = 0; variant < 2; ++variant) {
            Schedule s;
            s.steps = best.table.steps;
            for (int c : choosers) {
                int pick = -1;
                for (const auto& e : m.interactive)
                    if (e.src == c && e.label.is_tau() && (pick < 0 || variant == 1)) pick = e.dst;
                s.choice[c] = {pick};
            }
            const double v = evaluate_scheduler(m, m.goal, 1.0, best.table.steps, s);
            CHECK(v <= best.value + 1e-12);
            CHECK(v >= worst.value - 1e-12);
        }
    }
    CHECK(checked >= 20);
}

TEST_CASE("schedule text round-trips") {
    auto m = testing::model("intro_closed.imc");
    ClosedOptions mn;
    mn.direction = Optimize::Min;
    const auto r = closed_value(m, m.goal, 1.0, 1e-2, mn);
    const auto text = print_schedule(m, r.table.schedule);
    CHECK(print_schedule(m, parse_schedule(m, text)) == text);
    CHECK_THROWS(parse_schedule(m, "init * goal\n"));
    CHECK_THROWS(parse_schedule(m, "nowhere * u\n"));
}
