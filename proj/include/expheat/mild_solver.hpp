#pragma once

#include <optional>
#include <string>
#include <vector>

#include "expheat/nonlinearity.hpp"
#include "expheat/semigroup.hpp"
#include "expheat/spectral_grid.hpp"

namespace expheat {

/// One Cauchy problem u_t + L_theta u = f(u), u(0) = phi.
struct ProblemSpec {
    GridSpec grid;
    DiffusionSpec diffusion;
    NonlinearitySpec nonlin;
    Field initial;
    /// false switches the source off (pure linear diffusion).
    bool nonlinear = true;

    void validate() const;
};

/// Output times of a run and the number of quadrature panels per interval.
struct TimeGrid {
    std::vector<double> t_points;
    int substeps = 4;

    void validate() const;
};

/// Linear ramp of `ramp_steps` steps up to t0, then t0 * ratio^j up to t_final.
TimeGrid make_time_grid(double t0 = 0.01, int ramp_steps = 16, double ratio = 1.15, double t_final = 1e3,
                        int substeps = 4);

/// Grid shifted to start at t_shift: {t - t_shift : t > t_shift}.
TimeGrid shifted_time_grid(const TimeGrid& tg, double t_shift);

enum class SolverMode { time_march, global_picard };

struct SolverConfig {
    SolverMode mode = SolverMode::time_march;
    double picard_tol = 1e-10;
    int picard_max_iter = 200;
    /// Blowup once |u|^r exceeds this anywhere.
    double blowup_threshold = 700.0;
    double boundary_mass_tol = 1e-8;
    /// Panels are split so that dt * max f'(u) stays below this.
    double stiffness_limit = 0.5;
    /// L^q norms cached per output time.
    std::vector<double> norm_qs = {1.0, 2.0, 4.0, kInf};
    bool track_orlicz = true;
    bool store_states = true;

    void validate() const;
    bool operator==(const SolverConfig&) const = default;
};

struct Trajectory {
    ProblemSpec problem;
    std::vector<double> times;
    std::vector<Field> states;
    std::vector<double> norm_qs;
    /// lq_norms[i][j] = ||u(times[i])||_{norm_qs[j]}.
    std::vector<std::vector<double>> lq_norms;
    /// exp L^r norm per time, r = problem.nonlin.r (empty when not tracked).
    std::vector<double> orlicz_norms;
    std::vector<double> mass_series;
    std::optional<double> blowup_time;

    double boundary_mass_fraction = 0.0;
    double max_clamp = 0.0;
    double max_high_band_fraction = 0.0;
    std::vector<std::string> warnings;

    /// Cached norm if q was tracked, else computed from the stored state.
    double norm(std::size_t index, double q) const;
    std::size_t index_of(double t) const;
};

struct StepResult {
    Field state;
    bool blowup = false;
    double blowup_time = 0.0;
    double max_clamp = 0.0;
};

/// Advances u0 from t0 to t1 with `substeps` exponential midpoint panels.
/// Each panel freezes f at a midpoint predictor and integrates the semigroup
/// against it exactly; a panel starting at t = 0 uses the right-endpoint
/// value of f instead.
StepResult duhamel_step(const Field& u0, double t0, double t1, const ProblemSpec& spec, int substeps,
                        const SolverConfig& cfg = {});

/// Marches duhamel_step across the time grid. A blowup ends the trajectory
/// at blowup_time; a boundary-mass excess throws BoundaryMassViolation.
Trajectory integrate(const ProblemSpec& spec, const TimeGrid& tg, const SolverConfig& cfg = {});

struct PicardResult {
    Trajectory trajectory;
    /// sup over output times of ||v_{j+1}(t) - v_j(t)||_inf, one per iterate.
    std::vector<double> gaps;
    /// max(0, -min(v_{j+1} - v_j)) over all stored quadrature nodes.
    std::vector<double> monotonicity_violations;
    int iterations = 0;
};

/// v_0(t) = e^{-tL} phi, v_{j+1}(t) = v_0(t) + int_0^t e^{-(t-s)L} f(v_j(s)) ds on the
/// whole time grid, with the panel quadrature of duhamel_step.
PicardResult picard_solve(const ProblemSpec& spec, const TimeGrid& tg, const SolverConfig& cfg);

/// Problem whose initial data is the trajectory state at t_shift (must be a grid time).
ProblemSpec shifted_restart(const Trajectory& traj, double t_shift);

/// Fraction of spectral energy with some |k_a| > N/3.
double high_band_energy_fraction(const Field& f);

} // namespace expheat
