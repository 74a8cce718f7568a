// Distribution evaluation, sampling and hyper-Erlang phase-type fitting.
#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "imcsynth/model.hpp"

namespace imcsynth {

double cdf(const Distribution& d, double t);
double pdf(const Distribution& d, double t);
double sample(const Distribution& d, std::mt19937_64& rng);
double mean(const Distribution& d);

// Upper bounds on sup f and sup |f'| over (0, inf).
double density_sup(const Distribution& d);
double density_derivative_sup(const Distribution& d);

// Erlang(k, rate) cumulative distribution, evaluated stably.
double erlang_cdf(int k, double rate, double t);

enum class EntryMode { Instantaneous, Markovian };

// Hyper-Erlang chain: branch j (1-based length) has j phases of rate
// branch_rate; weights[j-1] is its entry probability.
struct PhaseTypeChain {
    int resolution = 1;
    double branch_rate = 1.0;
    std::vector<double> weights;
    EntryMode entry = EntryMode::Instantaneous;
    double entry_rate = 0.0;  // only for EntryMode::Markovian
    bool exact = false;       // exponential target reproduced exactly

    double cdf(double t) const;
    Distribution as_distribution() const;
    // Branch lengths with non-negligible weight, ascending.
    std::vector<int> active_branches() const;
    // Stand-alone IMC view: entry state "1", phases "j.k", sink "0".
    ImcModel to_imc() const;
};

struct FitError : std::runtime_error {
    double worst_t;
    double violation;
    FitError(const std::string& msg, double t, double v) : std::runtime_error(msg), worst_t(t), violation(v) {}
};

// 1024 uniform points on [0, 4T] plus T itself, sorted.
std::vector<double> dominance_grid(double horizon);

// Tolerance used when certifying dominance on the grid.
inline constexpr double kDominanceTol = 1e-10;

// AtLeast: fitted CDF <= target CDF on the grid. AtMost: fitted CDF >= target.
PhaseTypeChain hyper_erlang_fit(const Distribution& d, int i, Direction dir, const std::vector<double>& grid,
                                EntryMode entry = EntryMode::Instantaneous);

// Largest signed violation of the dominance requirement on the grid (<= 0 when it holds).
double dominance_violation(const PhaseTypeChain& c, const Distribution& d, Direction dir,
                           const std::vector<double>& grid, double* where = nullptr);

double sup_distance(const PhaseTypeChain& c, const Distribution& d, const std::vector<double>& grid);

}  // namespace imcsynth
