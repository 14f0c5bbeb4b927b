#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "expheat/mild_solver.hpp"

namespace expheat {

struct DecayReport {
    double q = 2.0;
    double fitted_exponent = 0.0;
    double theoretical_exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::pair<double, double> fit_window{0.0, 0.0};
    int points = 0;
};

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int points = 0;
};

/// Ordinary least squares of log y against log t.
PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> y);

/// (n / theta)(1 / p_star - 1 / q), with 1 / inf = 0.
double theoretical_exponent(int n, double theta, double p_star, double q);

struct ExponentSelection {
    double p_star = 1.0;
    double p1 = 1.0;
    double p2 = 1.0;
};

/// p_star = max{p, r n / (n + r theta)}, p1 = max{1, r n / (n + r theta)},
/// p2 = max{p_star n / (n + r theta), 1}.
ExponentSelection exponent_selector(double p, int n, double theta, double r);

inline constexpr int kMinFitPoints = 8;

/// Fits log ||u(t)||_q against log t over the times inside `window`.
/// fitted_exponent is minus the slope.
DecayReport fit_decay(const Trajectory& traj, double q, std::pair<double, double> window,
                      std::optional<double> theoretical = std::nullopt);

/// Default late-time window [T / 100, T].
std::pair<double, double> default_fit_window(const Trajectory& traj);

struct AsymptoticsReport {
    double m_star_estimate = 0.0;
    double m_final = 0.0;
    std::vector<double> times;
    std::vector<double> mass;
    /// m_star - m(t) per time.
    std::vector<double> mass_tail;
    std::vector<double> profile_qs;
    /// profile_errors[j][i]: t^{(n/theta)(1 - 1/q_j)} ||u(t_i) - m_star G_theta(t_i + 1)||_{q_j};
    /// NaN at t = 0.
    std::vector<std::vector<double>> profile_errors;
};

/// Mass limit and heat-kernel profile errors of a completed nonnegative run.
/// m_star extrapolates m(T) assuming an O(1/t) tail.
AsymptoticsReport mass_asymptotics(const Trajectory& traj, std::span<const double> qs = std::vector<double>{1.0, kInf});

/// Fit of log(m_star - m(t)) against log t inside `window` (nonpositive tails skipped).
PowerLawFit fit_mass_tail(const AsymptoticsReport& report, std::pair<double, double> window);

/// True when `series` is nonincreasing at every time in [t_lo, t_hi].
bool decreasing_over(std::span<const double> times, std::span<const double> series, double t_lo, double t_hi);

/// phi_lambda(x) = lambda^{n/p} phi(lambda x): index remapping for
/// lambda = 2^k, k >= 0; band-limited interpolation otherwise, clipped at 0
/// for nonnegative phi.
Field dilation_family(const Field& phi, double lambda, double p);

struct SupercriticalReport {
    double r = 3.0;
    bool blowup = false;
    std::optional<double> blowup_time;
    double initial_linf = 0.0;
    double max_linf = 0.0;
    double linf_growth = 0.0;
    double initial_orlicz = 0.0;
    double sup_orlicz = 0.0;
    /// sup_t ||u(t)||_{exp L^r} <= 2 ||phi||_{exp L^r} over the computed times.
    bool smallness_bound_held = false;
};

/// Runs integrate with f = |u|^{r theta/n} u e^{u^r} for the given r (theta = 2)
/// and reports blowup or L^inf growth. Orlicz norms use exp L^2.
SupercriticalReport supercritical_probe(const Field& phi, double r, const TimeGrid& tg, const SolverConfig& cfg);

struct SweepRow {
    double amplitude = 0.0;
    SupercriticalReport supercritical;
    SupercriticalReport critical;
};

struct AmplitudeSweep {
    std::vector<SweepRow> rows;
    /// First swept amplitude whose supercritical run blew up.
    std::optional<double> threshold_amplitude;
};

/// Runs supercritical_probe at r_super and at r = 2 for each amplitude times
/// the unit-amplitude profile `shape`.
AmplitudeSweep amplitude_sweep(const Field& shape, std::span<const double> amplitudes, double r_super,
                               const TimeGrid& tg, const SolverConfig& cfg);

} // namespace expheat
