// Time-bounded reachability on closed IMC by fixed-step backward induction
// with a one-jump-per-step Markovian kernel.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "imcsynth/model.hpp"

namespace imcsynth {

// Choice of tau successor per immediate state and step. A vector of length
// one applies to every step.
struct Schedule {
    int steps = 0;
    std::map<int, std::vector<int>> choice;

    // Target state chosen at `s` when the continuation is evaluated at step j,
    // or -1 when the schedule has no entry.
    int lookup(int s, int j) const;
};

struct ValueTable {
    double kappa = 0.0;
    int steps = 0;
    std::vector<double> initial;              // values at step 0
    std::vector<std::vector<double>> values;  // [step][state], only when requested
    Schedule schedule;
};

enum class Optimize { Max, Min };

struct ClosedOptions {
    int steps = 0;              // 0: derive from epsilon and requested kappa
    double kappa_request = 0.0; // upper bound on the step, 0 for none
    Optimize direction = Optimize::Max;
    bool keep_table = false;
    bool record_schedule = true;
};

struct ClosedResult {
    double value = 0.0;
    ValueTable table;
};

// Step count so that the accumulated one-jump truncation stays below epsilon.
int required_steps(double max_rate, double horizon, double epsilon, double kappa_request = 0.0);

double max_exit_rate(const ImcModel& m);

ClosedResult closed_value(const ImcModel& m, const std::vector<int>& goal, double horizon, double epsilon,
                          const ClosedOptions& opt = {});

// Value of the Markov chain induced by a fixed schedule on the same grid.
double evaluate_scheduler(const ImcModel& m, const std::vector<int>& goal, double horizon, int steps,
                          const Schedule& sched);

// `.sched` text: lines `state step target`, step `*` for every step.
std::string print_schedule(const ImcModel& m, const Schedule& s);
Schedule parse_schedule(const ImcModel& m, const std::string& text);

}  // namespace imcsynth
