#include "imcsynth/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "imcsynth/closed_reach.hpp"
#include "imcsynth/compose.hpp"
#include "imcsynth/distributions.hpp"
#include "imcsynth/game.hpp"
#include "imcsynth/scheduler.hpp"
#include "imcsynth/solve.hpp"

namespace imcsynth {

using nlohmann::json;

double apriori_bound(double kappa, double b, double horizon) {
    if (!(kappa > 0)) throw ModelError("kappa must be positive");
    if (kappa >= 1.0) return std::numeric_limits<double>::infinity();
    const double bt = b * horizon;
    return 10.0 * kappa * bt * bt * std::log(1.0 / kappa);
}

double estimate_b(const ImcModel& m, const McaSpec* spec) {
    double b = max_exit_rate(m);
    if (spec)
        for (const auto& f : spec->flow) {
            if (f.ctc.top) continue;
            b = std::max({b, density_sup(f.ctc.dist), density_derivative_sup(f.ctc.dist)});
        }
    return b;
}

double choose_kappa(double epsilon, double b, double horizon) {
    if (!(epsilon > 0) || !(horizon > 0)) throw ModelError("epsilon and horizon must be positive");
    // kappa ln(1/kappa) increases on (0, 1/e), so bisection inverts the bound there.
    double hi = std::min(horizon, 1.0 / std::exp(1.0));
    if (b * horizon > 0 && apriori_bound(hi, b, horizon) > epsilon) {
        double lo = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= 0) break;
            (apriori_bound(mid, b, horizon) <= epsilon ? lo : hi) = mid;
        }
        hi = lo;
    }
    if (!(hi > 0)) throw ModelError("epsilon too small to derive a step size");
    const double steps = std::ceil(horizon / hi - 1e-9);
    if (steps > 1e9) throw ModelError("epsilon requires more than 1e9 slots");
    return horizon / steps;
}

namespace {

bool is_multiple(double x, double unit) {
    const double r = x / unit;
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Runs `f` and re-throws any failure tagged with the stage name.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const ParseError& e) {
        throw StageError(name, e.what());
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::vector<int> goal_of(const ImcModel& m, const RunConfig& c) {
    if (c.goal.empty()) return m.goal;
    std::vector<int> g;
    for (const auto& n : c.goal) {
        const int s = m.find_state(n);
        if (s < 0) throw StageError("config", "unknown goal state '" + n + "'");
        g.push_back(s);
    }
    return g;
}

std::string out_path(const RunConfig& c, const std::string& stem, const std::string& ext) {
    std::filesystem::create_directories(c.out_dir);
    return (std::filesystem::path(c.out_dir) / (stem + ext)).string();
}

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(6);
    o << std::fixed << v;
    return o.str();
}

ParseOptions env_parse() {
    ParseOptions o;
    o.external_cycles_ok = true;
    return o;
}

struct Synthesis {
    ImcModel m;
    McaSpec spec;
    double b = 0, kappa = 0, delta = 0, bound = 0;
    int steps = 0, coarse = 1;
    Arena arena;
    GameTree tree;
    Partition part;
    SequenceFormLP lp;
};

// Shared front half of synthesize and export: parameters, arena, tree, LP.
void prepare(const RunConfig& c, Synthesis& s, json& rep) {
    s.m = stage("parse", [&] { return load_imc(c.model); });
    if (!c.goal.empty()) s.m.goal = goal_of(s.m, c);
    if (c.no_spec) s.spec = permissive_spec(s.m.actions);
    else s.spec = stage("parse", [&] { return load_mca(c.spec); });
    stage("validate", [&] {
        auto issues = validate(s.spec);
        if (!issues.empty()) throw ModelError(issues.front());
        return 0;
    });
    s.b = estimate_b(s.m, &s.spec);
    s.kappa = c.kappa > 0 ? c.kappa : stage("parameters", [&] { return choose_kappa(c.epsilon, s.b, c.horizon); });
    s.steps = static_cast<int>(std::lround(c.horizon / s.kappa));
    s.delta = c.delta > 0 ? c.delta : s.kappa;
    s.coarse = static_cast<int>(std::lround(s.delta / s.kappa));
    s.bound = apriori_bound(s.kappa, s.b, c.horizon);

    ArenaOptions ao;
    ao.translate.resolution = c.resolution;
    ao.translate.horizon = c.horizon;
    ao.translate.entry = c.literal_entry_rate ? EntryMode::Markovian : EntryMode::Instantaneous;
    s.arena = stage("arena", [&] { return build_arena(s.m, s.spec, ao); });
    GameQuery q;
    q.horizon = c.horizon;
    q.steps = s.steps;
    q.coarse = s.coarse;
    q.full_observation = c.full_observation;
    q.collapse = c.collapse;
    q.max_nodes = default_max_nodes();
    s.tree = stage("discretize", [&] { return discretize(s.arena, q); });
    s.part = stage("partition", [&] { return observation_partition(s.tree); });
    s.lp = stage("lp", [&] { return build_lp(s.tree, s.part); });

    rep["inputs"] = {{"model", c.model}, {"spec", c.no_spec ? json(nullptr) : json(c.spec)}, {"no_spec", c.no_spec}};
    rep["parameters"] = {{"horizon", c.horizon},
                         {"epsilon", c.epsilon},
                         {"kappa", s.kappa},
                         {"delta", s.delta},
                         {"slots", s.steps},
                         {"coarse", s.coarse},
                         {"resolution", c.resolution},
                         {"entry", c.literal_entry_rate ? "markovian" : "instantaneous"},
                         {"collapse", c.collapse},
                         {"full_observation", c.full_observation}};
    rep["bound"] = {{"b", s.b}, {"a_priori", number_or_null(s.bound)}};
    rep["stats"] = {{"arena_states", s.arena.model.num_states()},
                    {"spec_states", s.arena.spec.model.num_states()},
                    {"tree_nodes", s.tree.nodes.size()},
                    {"collapsed_terminals", s.tree.collapsed},
                    {"cells", s.part.cells.size()},
                    {"sequences", s.part.num_sequences},
                    {"lp_rows", s.lp.lp.rows.size()},
                    {"lp_cols", s.lp.lp.num_vars},
                    {"lp_canonical_nodes", s.lp.canonical_nodes}};
}

void emit_artifacts(const RunConfig& c, const Synthesis& s, bool dot, bool tree, bool lp, json& rep) {
    const std::string stem = s.m.name;
    if (dot) {
        auto p = out_path(c, stem, ".arena.dot");
        write_file(p, to_dot(s.arena.model));
        rep["artifacts"]["dot"] = p;
    }
    if (tree) {
        auto p = out_path(c, stem, ".tree");
        write_file(p, dump_tree(s.tree) + "# partition: cell: con nodes\n" + dump_partition(s.part));
        rep["artifacts"]["tree"] = p;
    }
    if (lp) {
        auto p = out_path(c, stem, ".lp");
        write_file(p, dump_lp(s.lp));
        rep["artifacts"]["lp"] = p;
    }
}

int cmd_check(const RunConfig& c, json& rep, std::ostringstream& sum) {
    const ImcModel m = stage("parse", [&] { return load_imc(c.model); });
    const auto goal = goal_of(m, c);
    stage("validate", [&] {
        if (!validate(m).closed) throw ModelError("model has external actions; use synthesize for open models");
        return 0;
    });
    ClosedOptions co;
    if (c.kappa > 0) co.steps = static_cast<int>(std::lround(c.horizon / c.kappa));
    const auto res = stage("closed-reach", [&] { return closed_value(m, goal, c.horizon, c.epsilon, co); });
    rep["inputs"] = {{"model", c.model}};
    rep["parameters"] = {{"horizon", c.horizon},
                         {"epsilon", c.epsilon},
                         {"kappa", res.table.kappa},
                         {"steps", res.table.steps}};
    rep["result"] = {{"value", res.value}};
    json choices = json::object();
    for (const auto& [s, v] : res.table.schedule.choice)
        if (!v.empty()) choices[m.states[s]] = m.states[v.front()];
    rep["result"]["initial_choices"] = choices;
    sum << "value " << fmt(res.value) << " (steps " << res.table.steps << ")\n";
    if (!c.schedule.empty()) {
        const auto sched = stage("parse", [&] { return parse_schedule(m, read_file(c.schedule)); });
        const double v = stage("closed-reach",
                               [&] { return evaluate_scheduler(m, goal, c.horizon, res.table.steps, sched); });
        rep["result"]["scheduled_value"] = v;
        sum << "scheduled value " << fmt(v) << "\n";
    }
    if (c.emit_policy) {
        auto p = out_path(c, m.name, ".sched");
        write_file(p, print_schedule(m, res.table.schedule));
        rep["artifacts"]["schedule"] = p;
    }
    return 0;
}

int cmd_synthesize(const RunConfig& c, json& rep, std::ostringstream& sum) {
    Synthesis s;
    prepare(c, s, rep);
    SolveOptions so;
    const Solution sol = stage("solve", [&] { return solve_lp(s.tree, s.part, s.lp, so); });
    rep["result"] = {{"value", sol.value},
                     {"certificate_gap", sol.certificate_gap},
                     {"pivots", sol.pivots},
                     {"lower_bound", std::isfinite(s.bound) ? json(std::max(0.0, sol.value - s.bound)) : json(0.0)}};
    sum << "value " << fmt(sol.value) << "  a priori bound "
        << (std::isfinite(s.bound) ? fmt(s.bound) : std::string("inf")) << "  (kappa " << s.kappa << ", "
        << s.steps << " slots, " << s.tree.nodes.size() << " nodes)\n";
    if (!c.full_observation) {
        const auto pol = stage("scheduler", [&] { return extract_scheduler(s.tree, s.part, sol); });
        json dec = json::array();
        for (const auto& [key, d] : pol.decisions) {
            json w = json::object();
            for (std::size_t k = 0; k < d.targets.size(); ++k) w[d.targets[k]] = d.weights[k];
            dec.push_back({{"m_state", d.m_state}, {"coarse", d.coarse}, {"weights", w}});
        }
        rep["policy"] = {{"decisions", pol.decisions.size()}, {"first", dec.empty() ? json(nullptr) : dec.front()}};
        if (c.emit_policy) {
            auto p = out_path(c, s.m.name, ".policy");
            write_file(p, print_policy(pol));
            rep["artifacts"]["policy"] = p;
        }
    }
    emit_artifacts(c, s, c.emit_dot, c.emit_tree, c.emit_lp, rep);
    return 0;
}

int cmd_export(const RunConfig& c, json& rep, std::ostringstream& sum) {
    Synthesis s;
    prepare(c, s, rep);
    const bool any = c.emit_dot || c.emit_tree || c.emit_lp;
    emit_artifacts(c, s, !any || c.emit_dot, !any || c.emit_tree, !any || c.emit_lp, rep);
    for (const auto& [k, v] : rep["artifacts"].items()) sum << k << " " << v.get<std::string>() << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& c, json& rep, std::ostringstream& sum) {
    const ImcModel m = stage("parse", [&] { return load_imc(c.model); });
    const auto goal = goal_of(m, c);
    ImcModel env;
    if (!c.env.empty()) env = stage("parse", [&] { return load_imc(c.env, env_parse()); });
    SchedulerPolicy pol;
    if (!c.policy.empty()) pol = stage("parse", [&] { return parse_policy(read_file(c.policy)); });
    EnvPolicy ep;
    if (c.env_policy == "greedy-worst") {
        ep.kind = EnvPolicy::Kind::GreedyWorst;
    } else if (c.env_policy != "uniform") {
        ep.kind = EnvPolicy::Kind::Fixed;
        ep.schedule = stage("parse", [&] { return read_file(c.env_policy); });
    }
    SimOptions so;
    so.runs = c.runs;
    so.seed = c.seed;
    so.threads = c.threads;
    const auto r = stage("simulate", [&] {
        return simulate(m, env, c.policy.empty() ? nullptr : &pol, ep, goal, c.horizon, so);
    });
    rep["inputs"] = {{"model", c.model},
                     {"env", c.env.empty() ? json(nullptr) : json(c.env)},
                     {"policy", c.policy.empty() ? json(nullptr) : json(c.policy)},
                     {"env_policy", c.env_policy}};
    rep["parameters"] = {{"horizon", c.horizon}, {"runs", c.runs}, {"seed", c.seed}};
    rep["result"] = {{"estimate", r.estimate},
                     {"half_width_95", r.half_width},
                     {"successes", r.successes},
                     {"zeno_aborts", r.zeno_aborts}};
    if (!c.policy.empty()) rep["result"]["policy_value"] = pol.value;
    sum << "estimate " << fmt(r.estimate) << " +- " << fmt(r.half_width) << " (" << r.runs << " runs)\n";
    if (r.zeno_aborts) sum << "warning: " << r.zeno_aborts << " runs hit the Zeno guard\n";
    return 0;
}

int cmd_conformance(const RunConfig& c, json& rep, std::ostringstream& sum) {
    const std::string envp = c.env.empty() ? c.model : c.env;
    const ImcModel env = stage("parse", [&] { return load_imc(envp, env_parse()); });
    const McaSpec spec = stage("parse", [&] { return load_mca(c.spec); });
    const auto r = stage("conformance", [&] { return conformance_spot_check(env, spec, c.samples, c.seed); });
    rep["inputs"] = {{"env", envp}, {"spec", c.spec}};
    rep["parameters"] = {{"samples", c.samples}, {"seed", c.seed}};
    rep["result"] = {{"pass", r.pass()},
                     {"relation", r.relation},
                     {"statistical", r.statistical},
                     {"failures", r.failures},
                     {"notes", r.notes}};
    sum << (r.pass() ? "pass" : "fail") << "\n";
    for (const auto& f : r.failures) sum << "  " << f << "\n";
    return r.pass() ? 0 : 3;
}

}  // namespace

void validate_config(const RunConfig& c) {
    static const std::set<std::string> commands{"check", "synthesize", "simulate", "conformance", "export"};
    auto bad = [](const std::string& m) { throw StageError("config", m); };
    if (!commands.count(c.command)) bad("unknown command '" + c.command + "'");
    if (c.command != "conformance" && c.model.empty()) bad("a model path is required");
    if (!(c.horizon >= 0) || !std::isfinite(c.horizon)) bad("horizon must be non-negative");
    if (!(c.epsilon > 0)) bad("epsilon must be positive");
    if (c.kappa < 0 || c.delta < 0) bad("kappa and delta must be positive");
    if (c.resolution < 1) bad("erlang resolution must be at least 1");
    const bool game = c.command == "synthesize" || c.command == "export";
    if (game) {
        if (!(c.horizon > 0)) bad("horizon must be positive");
        if (c.spec.empty() && !c.no_spec) bad(c.command + " requires --spec or --no-spec");
        if (!c.spec.empty() && c.no_spec) bad("--spec and --no-spec are exclusive");
    }
    if (c.kappa > 0 && c.horizon > 0 && !is_multiple(c.horizon, c.kappa)) bad("horizon must be a multiple of kappa");
    if (c.delta > 0) {
        if (c.kappa <= 0) bad("delta needs an explicit kappa");
        if (!is_multiple(c.delta, c.kappa)) bad("delta must be a multiple of kappa");
    }
    if (c.command == "conformance" && c.spec.empty()) bad("conformance requires --spec");
    if (c.command == "conformance" && c.env.empty() && c.model.empty()) bad("conformance requires --env");
    if (c.command == "simulate" && c.runs == 0) bad("runs must be positive");
}

RunOutcome run(const RunConfig& c) {
    RunOutcome out;
    json rep;
    rep["tool"] = "imc-synth";
    rep["report_version"] = 1;
    rep["command"] = c.command;
    std::ostringstream sum;
    const auto start = std::chrono::steady_clock::now();
    try {
        validate_config(c);
        if (c.command == "check") out.exit_code = cmd_check(c, rep, sum);
        else if (c.command == "synthesize") out.exit_code = cmd_synthesize(c, rep, sum);
        else if (c.command == "export") out.exit_code = cmd_export(c, rep, sum);
        else if (c.command == "simulate") out.exit_code = cmd_simulate(c, rep, sum);
        else out.exit_code = cmd_conformance(c, rep, sum);
    } catch (const StageError& e) {
        rep["error"] = {{"stage", e.stage}, {"message", e.what()}};
        sum << "error: " << e.what() << "\n";
        out.exit_code = e.stage == "config" ? 2 : 1;
    } catch (const std::exception& e) {
        rep["error"] = {{"stage", "internal"}, {"message", e.what()}};
        sum << "error: " << e.what() << "\n";
        out.exit_code = 1;
    }
    if (c.report_timing)
        rep["timing"] = {{"wall_seconds",
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    rep["exit_code"] = out.exit_code;
    out.report = rep.dump(2) + "\n";
    out.summary = sum.str();
    if (!c.report.empty()) {
        try {
            write_file(c.report, out.report);
        } catch (const std::exception& e) {
            out.summary += std::string("error: cannot write report: ") + e.what() + "\n";
            if (out.exit_code == 0) out.exit_code = 1;
        }
    }
    return out;
}

}  // namespace imcsynth
