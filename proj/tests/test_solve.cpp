#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "imcsynth/solve.hpp"
#include "support.hpp"

using namespace imcsynth;

namespace {

LpProblem textbook() {
    // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18  (optimum 36 at (2, 6))
    LpProblem p;
    p.num_vars = 2;
    p.objective = {3, 5};
    p.rows = {{{{0, 1}}, Sense::LE, 4}, {{{1, 2}}, Sense::LE, 12}, {{{0, 3}, {1, 2}}, Sense::LE, 18}};
    return p;
}

// Value of a 2x2 zero-sum matrix game for the row maximizer, by formula.
double matrix_game_2x2(double a, double b, double c, double d) {
    const double lo = std::max(std::min(a, b), std::min(c, d));
    const double hi = std::min(std::max(a, c), std::max(b, d));
    if (lo == hi) return lo;  // saddle point
    return (a * d - b * c) / (a + d - b - c);
}

}  // namespace

TEST_CASE("simplex solves the textbook LP with its known duals") {
    auto r = simplex_solve(textbook());
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(36));
    CHECK(r.x[0] == doctest::Approx(2));
    CHECK(r.x[1] == doctest::Approx(6));
    CHECK(r.dual[0] == doctest::Approx(0));
    CHECK(r.dual[1] == doctest::Approx(1.5));
    CHECK(r.dual[2] == doctest::Approx(1));
    CHECK(r.gap < 1e-9);
}

TEST_CASE("simplex handles equality and >= rows through phase one") {
    // min x + y  s.t.  x + y >= 2, x - y = 0   as   max -x - y
    LpProblem p;
    p.num_vars = 2;
    p.objective = {-1, -1};
    p.rows = {{{{0, 1}, {1, 1}}, Sense::GE, 2}, {{{0, 1}, {1, -1}}, Sense::EQ, 0}};
    auto r = simplex_solve(p);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-2));
    CHECK(r.x[0] == doctest::Approx(1));
    CHECK(r.gap < 1e-9);
}

TEST_CASE("simplex reports infeasible and unbounded problems") {
    LpProblem inf;
    inf.num_vars = 1;
    inf.objective = {1};
    inf.rows = {{{{0, 1}}, Sense::LE, 1}, {{{0, 1}}, Sense::GE, 2}};
    CHECK(simplex_solve(inf).status == LpStatus::Infeasible);
    LpProblem unb;
    unb.num_vars = 2;
    unb.objective = {1, 0};
    unb.rows = {{{{0, 1}, {1, -1}}, Sense::LE, 1}};
    CHECK(simplex_solve(unb).status == LpStatus::Unbounded);
}

TEST_CASE("negative right-hand sides are normalized") {
    // max -x  s.t.  -x <= -3  (x >= 3)
    LpProblem p;
    p.num_vars = 1;
    p.objective = {-1};
    p.rows = {{{{0, -1}}, Sense::LE, -3}};
    auto r = simplex_solve(p);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(3));
    CHECK(r.dual[0] == doctest::Approx(1));
}

TEST_CASE("Beale's degenerate LP terminates") {
    // Cycles under naive Dantzig pricing with lowest-index ties; optimum 1/20.
    LpProblem p;
    p.num_vars = 4;
    p.objective = {0.75, -150, 0.02, -6};
    p.rows = {{{{0, 0.25}, {1, -60}, {2, -0.04}, {3, 9}}, Sense::LE, 0},
              {{{0, 0.5}, {1, -90}, {2, -0.02}, {3, 3}}, Sense::LE, 0},
              {{{2, 1}}, Sense::LE, 1}};
    SimplexOptions o;
    o.bland_after = 3;
    auto r = simplex_solve(p, o);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(0.05));
}

TEST_CASE("the simplex is generic over the scalar") {
    auto a = simplex_solve<double>(textbook());
    auto b = simplex_solve<long double>(textbook());
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
}

TEST_CASE("oversized tableaux are refused") {
    SimplexOptions o;
    o.max_cells = 10;
    CHECK_THROWS_AS(simplex_solve(textbook(), o), LpNumericalError);
}

TEST_CASE("random 2x2 matrix games match the closed form") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 200; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        // max v  s.t.  v <= a p + c (1-p),  v <= b p + d (1-p),  0 <= p <= 1
        LpProblem lp;
        lp.num_vars = 3;  // p, 1-p, v
        lp.objective = {0, 0, 1};
        lp.rows = {{{{2, 1}, {0, -a}, {1, -c}}, Sense::LE, 0},
                   {{{2, 1}, {0, -b}, {1, -d}}, Sense::LE, 0},
                   {{{0, 1}, {1, 1}}, Sense::EQ, 1}};
        auto r = simplex_solve(lp);
        REQUIRE(r.status == LpStatus::Optimal);
        CHECK(r.objective == doctest::Approx(matrix_game_2x2(a, b, c, d)).epsilon(1e-9));
    }
}

TEST_CASE("yes/no at N = 2: partial observation halves the full-observation value") {
    const double q = 1 - std::exp(-1.0);
    auto part = testing::make_game(testing::model("yesno.imc"), permissive_spec({"a"}), 1.0, 2);
    auto lp = build_lp(part.tree, part.part);
    auto sol = solve_lp(part.tree, part.part, lp);
    CHECK(sol.value == doctest::Approx(q / 2).epsilon(1e-6));
    CHECK(sol.certificate_gap < 1e-7);

    auto full = testing::make_game(testing::model("yesno.imc"), permissive_spec({"a"}), 1.0, 2, 1, true);
    auto lpf = build_lp(full.tree, full.part);
    CHECK(solve_lp(full.tree, full.part, lpf).value == doctest::Approx(q).epsilon(1e-6));
}

TEST_CASE("LP value agrees with a grid search over con's behavioral strategies") {
    for (int N : {1, 2}) {
        CAPTURE(N);
        auto g = testing::make_game(testing::model("yesno.imc"), permissive_spec({"a"}), 1.0, N);
        auto lp = build_lp(g.tree, g.part);
        const double v = solve_lp(g.tree, g.part, lp).value;
        const double grid = testing::grid_maxmin(g.tree, g.part, 200);
        CHECK(v >= grid - 1e-9);
        CHECK(v - grid <= 5e-3);
    }
}

TEST_CASE("LP value agrees with normal-form enumeration") {
    struct Case {
        const char* model;
        std::vector<std::string> spec;
        double T;
        int N;
    };
    for (const auto& c : std::vector<Case>{{"intro.imc", {"a"}, 1.5, 1},
                                           {"intro.imc", {"a"}, 1.5, 2},
                                           {"intro_closed.imc", {}, 1.5, 3}}) {
        CAPTURE(std::string(c.model));
        CAPTURE(c.N);
        auto g = testing::make_game(testing::model(c.model), permissive_spec(c.spec), c.T, c.N);
        auto lp = build_lp(g.tree, g.part);
        const double v = solve_lp(g.tree, g.part, lp).value;
        CHECK(v == doctest::Approx(normal_form_oracle(g.tree, g.part)).epsilon(1e-8));
    }
}

TEST_CASE("the realization plan is consistent and its best response attains the value") {
    auto g = testing::make_game(testing::model("yesno.imc"), permissive_spec({"a"}), 1.0, 2);
    auto lp = build_lp(g.tree, g.part);
    auto sol = solve_lp(g.tree, g.part, lp);
    REQUIRE(sol.realization.size() == static_cast<std::size_t>(g.part.num_sequences));
    CHECK(sol.realization[0] == doctest::Approx(1.0));
    for (const auto& c : g.part.cells) {
        double sum = 0;
        for (std::size_t k = 0; k < c.actions.size(); ++k) {
            CHECK(sol.realization[c.first_seq + k] >= -1e-12);
            sum += sol.realization[c.first_seq + k];
        }
        CHECK(sum == doctest::Approx(sol.realization[c.parent_seq]).epsilon(1e-9));
    }
    const auto beh = behavioral(g.part, sol.realization);
    for (const auto& b : beh) {
        double s = 0;
        for (double x : b) s += x;
        CHECK(s == doctest::Approx(1.0));
    }
    double br = 0;
    env_best_response(g.tree, g.part, beh, &br);
    CHECK(br == doctest::Approx(sol.value).epsilon(1e-8));
}

TEST_CASE("tie-breaking keeps the value") {
    auto g = testing::make_game(testing::model("intro.imc"), permissive_spec({"a"}), 1.5, 2);
    auto lp = build_lp(g.tree, g.part);
    SolveOptions plain;
    plain.tie_break = false;
    CHECK(solve_lp(g.tree, g.part, lp).value == doctest::Approx(solve_lp(g.tree, g.part, lp, plain).value));
}

TEST_CASE("LP dump lists the objective and every row") {
    auto g = testing::make_game(testing::model("yesno.imc"), permissive_spec({"a"}), 1.0, 1);
    auto lp = build_lp(g.tree, g.part);
    const auto d = dump_lp(lp);
    CHECK(d.rfind("lp-v1\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(d.begin(), d.end(), '\n')) >= lp.lp.rows.size());
}
