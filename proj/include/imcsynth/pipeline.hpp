// End-to-end orchestration behind the command-line tool: parameter
// selection, the synthesis pipeline, artifact export and the JSON report.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "imcsynth/model.hpp"

namespace imcsynth {

struct RunConfig {
    std::string command;  // check, synthesize, simulate, conformance, export
    std::string model, spec, env, policy, schedule;
    bool no_spec = false;
    std::vector<std::string> goal;  // overrides the model's goal line when non-empty
    double horizon = 1.0;
    double epsilon = 1e-3;
    double kappa = 0.0;  // 0: derived from epsilon
    double delta = 0.0;  // 0: kappa
    int resolution = 4;
    bool literal_entry_rate = false;
    bool collapse = true;
    bool full_observation = false;
    std::string env_policy = "uniform";  // uniform, greedy-worst, or a .sched file
    std::uint64_t seed = 1;
    std::size_t runs = 100000;
    std::size_t samples = 2000;
    unsigned threads = 0;
    std::string out_dir = ".";
    bool emit_dot = false, emit_tree = false, emit_lp = false, emit_policy = false;
    std::string report;  // JSON report path, empty for stdout only
    bool report_timing = false;
};

// An error tagged with the pipeline stage it came from.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string s, const std::string& msg) : std::runtime_error(s + ": " + msg), stage(std::move(s)) {}
};

// A priori discretization bound 10 kappa (bT)^2 ln(1/kappa); infinite for kappa >= 1.
double apriori_bound(double kappa, double b, double horizon);

// Max of the model's exit rates and the density and density-derivative
// bounds of every constrained flow in the specification (if any).
double estimate_b(const ImcModel& m, const McaSpec* spec);

// Largest kappa dividing the horizon whose a priori bound stays within epsilon.
double choose_kappa(double epsilon, double b, double horizon);

// Checks the numeric invariants of a configuration; throws StageError("config").
void validate_config(const RunConfig& c);

struct RunOutcome {
    int exit_code = 0;
    std::string report;   // JSON document
    std::string summary;  // short human-readable lines
};

RunOutcome run(const RunConfig& c);

}  // namespace imcsynth
