#include <doctest.h>

#include <cmath>

#include "imcsynth/scheduler.hpp"
#include "support.hpp"

using namespace imcsynth;

namespace {

// 99.99% normal band around an estimate.
bool within(const SimResult& r, double exact) {
    const double sd = std::sqrt(std::max(exact * (1 - exact), 1e-12) / static_cast<double>(r.runs));
    return std::abs(r.estimate - exact) <= 4 * sd + 1e-12;
}

SchedulerPolicy intro_policy(int N = 4) {
    static std::vector<testing::Game> keep;  // trees reference their arenas
    keep.push_back(testing::make_game(testing::model("intro.imc"), permissive_spec({"a"}), 1.5, N));
    auto& g = keep.back();
    auto lp = build_lp(g.tree, g.part);
    return extract_scheduler(g.tree, g.part, solve_lp(g.tree, g.part, lp));
}

}  // namespace

TEST_CASE("extracted intro policy always moves to the fast branch") {
    const auto pol = intro_policy();
    CHECK(pol.initial == "init");
    CHECK_FALSE(pol.decisions.empty());
    for (const auto& [key, d] : pol.decisions) {
        CHECK(d.m_state == "init");
        REQUIRE(d.targets.size() == 2);
        for (std::size_t k = 0; k < d.targets.size(); ++k)
            CHECK(d.weights[k] == doctest::Approx(d.targets[k] == "v" ? 1.0 : 0.0));
    }
}

TEST_CASE("policy text round-trips exactly") {
    const auto pol = intro_policy();
    const auto text = print_policy(pol);
    const auto back = parse_policy(text);
    CHECK(print_policy(back) == text);
    CHECK(back.kappa == pol.kappa);
    CHECK(back.value == pol.value);
    CHECK(back.decisions.size() == pol.decisions.size());
}

TEST_CASE("malformed policies are rejected") {
    CHECK_THROWS(parse_policy("format obs-v2\n"));
    CHECK_THROWS(parse_policy("format obs-v1\nkappa 0.1\ndelta 0.1\nhorizon 1\nvalue 0.5\ninitial s\nzz s 0 t 1\n"));
}

TEST_CASE("full-observation trees do not yield a policy") {
    auto g = testing::make_game(testing::model("yesno.imc"), permissive_spec({"a"}), 1.0, 1, 1, true);
    auto lp = build_lp(g.tree, g.part);
    CHECK_THROWS_AS(extract_scheduler(g.tree, g.part, solve_lp(g.tree, g.part, lp)), ModelError);
}

TEST_CASE("a closed single delay simulates to 1 - exp(-2T)") {
    SimOptions o;
    o.runs = 40000;
    auto m = testing::model("rate2.imc");
    const auto r = simulate(m, ImcModel{}, nullptr, {}, m.goal, 1.0, o);
    CHECK(r.runs == 40000);
    CHECK(within(r, 1 - std::exp(-2.0)));
    CHECK(r.half_width > 0);
    CHECK(r.zeno_aborts == 0);
}

TEST_CASE("horizon zero reaches only a goal that is already there") {
    SimOptions o;
    o.runs = 1000;
    auto m = testing::model("rate2.imc");
    CHECK(simulate(m, ImcModel{}, nullptr, {}, m.goal, 0.0, o).estimate == 0.0);
    auto at = parse_imc("state g\ninitial g\ngoal g\n");
    CHECK(simulate(at, ImcModel{}, nullptr, {}, at.goal, 0.0, o).estimate == 1.0);
}

TEST_CASE("results do not depend on the thread count") {
    auto m = testing::model("intro.imc");
    const auto env = testing::env_model("intro_env.imc");
    const auto pol = intro_policy();
    SimOptions o;
    o.runs = 20000;
    o.seed = 17;
    o.threads = 1;
    const auto a = simulate(m, env, &pol, {}, m.goal, 1.5, o);
    o.threads = 4;
    const auto b = simulate(m, env, &pol, {}, m.goal, 1.5, o);
    CHECK(a.estimate == b.estimate);
    CHECK(a.successes == b.successes);
    o.seed = 18;
    CHECK(simulate(m, env, &pol, {}, m.goal, 1.5, o).successes != a.successes);
}

TEST_CASE("the fast branch is taken when the environment stays silent") {
    auto m = testing::model("intro.imc");
    const auto pol = intro_policy();
    SimOptions o;
    o.runs = 40000;
    const auto r = simulate(m, testing::env_model("silent_env.imc"), &pol, {}, m.goal, 1.5, o);
    CHECK(within(r, 1 - std::exp(-4.5)));
}

TEST_CASE("a worst-case environment forces the slow a-branch") {
    auto m = testing::model("intro.imc");
    const auto pol = intro_policy();
    SimOptions o;
    o.runs = 40000;
    EnvPolicy worst{EnvPolicy::Kind::GreedyWorst, {}};
    const auto r = simulate(m, testing::env_model("intro_env.imc"), &pol, worst, m.goal, 1.5, o);
    CHECK(within(r, 1 - std::exp(-3.0)));
}

TEST_CASE("a fixed environment schedule is followed") {
    auto m = testing::model("intro.imc");
    const auto env = testing::env_model("intro_env.imc");
    SimOptions o;
    o.runs = 40000;
    // Synchronizing on a sends M down the rate-2 branch.
    EnvPolicy offer{EnvPolicy::Kind::Fixed, "init|e * s|e\n"};
    CHECK(within(simulate(m, env, nullptr, offer, m.goal, 1.5, o), 1 - std::exp(-3.0)));
    // Approving hands the choice to con, here uniform between rates 1 and 3.
    EnvPolicy approve{EnvPolicy::Kind::Fixed, "init|e * u|e\n"};
    const double mix = 0.5 * (1 - std::exp(-1.5)) + 0.5 * (1 - std::exp(-4.5));
    CHECK(within(simulate(m, env, nullptr, approve, m.goal, 1.5, o), mix));
}

TEST_CASE("tree sampling reproduces the solved game value") {
    auto g = testing::make_game(testing::model("yesno.imc"), permissive_spec({"a"}), 1.0, 2);
    auto lp = build_lp(g.tree, g.part);
    const auto sol = solve_lp(g.tree, g.part, lp);
    const auto beh = behavioral(g.part, sol.realization);
    const auto env = env_best_response(g.tree, g.part, beh);
    const auto r = simulate_tree(g.tree, g.part, beh, env, 50000, 3);
    CHECK(within(r, sol.value));
}

TEST_CASE("conforming environments pass the spot check") {
    const auto spec = testing::spec("reqresp_exp2.mca");
    for (const char* e : {"reqresp_env.imc", "reqresp_env_fast.imc"}) {
        CAPTURE(std::string(e));
        const auto r = conformance_spot_check(testing::env_model(e), spec, 2000);
        CHECK(r.relation);
        CHECK(r.statistical);
        CHECK(r.pass());
    }
    const auto r = conformance_spot_check(testing::env_model("example2_env.imc"), testing::spec("example2.mca"), 2000);
    CHECK(r.pass());
}

TEST_CASE("a missing must action breaks the relation") {
    const auto r =
        conformance_spot_check(testing::env_model("example2_env_broken.imc"), testing::spec("example2.mca"), 2000);
    CHECK_FALSE(r.relation);
    CHECK_FALSE(r.pass());
    REQUIRE_FALSE(r.failures.empty());
    CHECK(r.failures[0].find("must a") != std::string::npos);
}

TEST_CASE("a server slower than the upper bound fails the statistical test") {
    // Answers after Exp(2) while the specification demands at most Exp(3).
    const auto r = conformance_spot_check(testing::env_model("reqresp_env.imc"), testing::spec("reqresp_exp3.mca"), 2000);
    CHECK(r.relation);
    CHECK_FALSE(r.statistical);
    CHECK_FALSE(r.pass());
}
