// imc-synth: time-bounded reachability and scheduler synthesis for IMC in
// specified environments.
#include <CLI11.hpp>

#include <iostream>

#include "imcsynth/pipeline.hpp"

int main(int argc, char** argv) {
    using imcsynth::RunConfig;
    CLI::App app{"Scheduler synthesis for interactive Markov chains in unknown environments"};
    app.require_subcommand(1);
    RunConfig c;
    bool json_out = false;

    auto common = [&](CLI::App* s) {
        s->add_option("model", c.model, "IMC model (.imc)");
        s->add_option("-T,--horizon", c.horizon, "time bound")->capture_default_str();
        s->add_option("--goal", c.goal, "goal states, overriding the model's goal line")->delimiter(',');
        s->add_option("--report", c.report, "write the JSON report to this path");
        s->add_flag("--json", json_out, "print the JSON report instead of the summary");
        s->add_flag("--report-timing", c.report_timing, "include wall time in the report");
        s->add_option("-o,--out", c.out_dir, "directory for emitted artifacts")->capture_default_str();
    };
    auto discretization = [&](CLI::App* s) {
        s->add_option("-e,--epsilon", c.epsilon, "target discretization error")->capture_default_str();
        s->add_option("--kappa", c.kappa, "slot length (default: from epsilon)");
    };
    auto game = [&](CLI::App* s) {
        common(s);
        discretization(s);
        s->add_option("--spec", c.spec, "environment specification (.mca)");
        s->add_flag("--no-spec", c.no_spec, "assume nothing about the environment");
        s->add_option("--delta", c.delta, "clock resolution, a multiple of kappa (default: kappa)");
        s->add_option("-i,--resolution", c.resolution, "hyper-Erlang resolution")->capture_default_str();
        s->add_flag("--literal-entry-rate", c.literal_entry_rate,
                    "enter hyper-Erlang branches by Markovian edges instead of splits");
        s->add_flag("!--no-collapse", c.collapse, "expand subtrees where con has no choice");
        s->add_flag("--full-observation", c.full_observation, "ablation: con observes everything");
        s->add_flag("--emit-dot", c.emit_dot, "write the arena as Graphviz");
        s->add_flag("--emit-tree", c.emit_tree, "write the game tree and partition");
        s->add_flag("--emit-lp", c.emit_lp, "write the sequence-form LP");
    };

    auto* check = app.add_subcommand("check", "time-bounded reachability of a closed IMC");
    common(check);
    discretization(check);
    check->add_option("--schedule", c.schedule, "also evaluate this fixed .sched schedule");
    check->add_flag("--emit-policy", c.emit_policy, "write the optimal schedule (.sched)");

    auto* synth = app.add_subcommand("synthesize", "synthesize a scheduler against a specified environment");
    game(synth);
    synth->add_flag("--emit-policy", c.emit_policy, "write the extracted scheduler (.policy)");

    auto* exp = app.add_subcommand("export", "write DOT, tree and LP dumps without solving");
    game(exp);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate against a concrete environment");
    common(sim);
    sim->add_option("--env", c.env, "environment IMC (omit for a closed model)");
    sim->add_option("--policy", c.policy, "scheduler (.policy); default uniform choices");
    sim->add_option("--env-policy", c.env_policy, "uniform, greedy-worst, or a .sched file")->capture_default_str();
    sim->add_option("--runs", c.runs, "number of runs")->capture_default_str();
    sim->add_option("--seed", c.seed, "base seed")->capture_default_str();
    sim->add_option("--threads", c.threads, "worker threads (0: all cores)")->capture_default_str();

    auto* conf = app.add_subcommand("conformance", "spot-check an environment against a specification");
    conf->add_option("--env", c.env, "environment IMC")->required();
    conf->add_option("--spec", c.spec, "specification (.mca)")->required();
    conf->add_option("--samples", c.samples, "samples per Stop-time test")->capture_default_str();
    conf->add_option("--seed", c.seed, "base seed")->capture_default_str();
    conf->add_option("--report", c.report, "write the JSON report to this path");
    conf->add_flag("--json", json_out, "print the JSON report instead of the summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage errors share the config exit code; --help still exits 0.
        return app.exit(e) == 0 ? 0 : 2;
    }
    c.command = app.get_subcommands().front()->get_name();
    const auto out = imcsynth::run(c);
    if (json_out) std::cout << out.report;
    else std::cout << out.summary;
    if (out.exit_code != 0 && json_out) std::cerr << out.summary;
    return out.exit_code;
}
