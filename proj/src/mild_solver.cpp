#include "expheat/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "expheat/errors.hpp"
#include "expheat/orlicz.hpp"

namespace expheat {

using cvec = std::vector<std::complex<double>>;

void ProblemSpec::validate() const {
    diffusion.validate();
    nonlin.validate();
    if (grid.dimension != diffusion.dimension || grid.dimension != nonlin.dimension)
        throw std::invalid_argument("ProblemSpec: grid, diffusion and nonlinearity dimensions differ");
    if (diffusion.theta != nonlin.theta)
        throw std::invalid_argument("ProblemSpec: diffusion and nonlinearity theta differ");
    if (!(initial.grid() == grid)) throw std::invalid_argument("ProblemSpec: initial data lives on another grid");
    if (!initial.all_finite()) throw std::invalid_argument("ProblemSpec: initial data not finite");
    if (nonlinear && !nonlin.signed_mode && initial.min() < 0.0)
        throw std::invalid_argument("ProblemSpec: initial data must be nonnegative unless signed_mode");
}

void TimeGrid::validate() const {
    if (t_points.empty()) throw std::invalid_argument("TimeGrid: no time points");
    if (!(t_points.front() > 0.0)) throw std::invalid_argument("TimeGrid: first point must be positive");
    for (std::size_t i = 1; i < t_points.size(); ++i)
        if (!(t_points[i] > t_points[i - 1])) throw std::invalid_argument("TimeGrid: points must increase strictly");
    if (substeps < 1) throw std::invalid_argument("TimeGrid: substeps must be >= 1");
}

TimeGrid make_time_grid(double t0, int ramp_steps, double ratio, double t_final, int substeps) {
    if (!(t0 > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("make_time_grid: times must be positive");
    if (ramp_steps < 1) throw std::invalid_argument("make_time_grid: ramp_steps must be >= 1");
    if (!(ratio > 1.0 && ratio <= 2.0)) throw std::invalid_argument("make_time_grid: ratio must lie in (1, 2]");
    TimeGrid tg;
    tg.substeps = substeps;
    const double ramp_end = std::min(t0, t_final);
    for (int k = 1; k <= ramp_steps; ++k) tg.t_points.push_back(ramp_end * k / ramp_steps);
    double t = ramp_end;
    while (t * ratio < t_final * (1.0 - 1e-12)) {
        t *= ratio;
        tg.t_points.push_back(t);
    }
    if (tg.t_points.back() < t_final * (1.0 - 1e-12)) tg.t_points.push_back(t_final);
    tg.validate();
    return tg;
}

TimeGrid shifted_time_grid(const TimeGrid& tg, double t_shift) {
    TimeGrid out;
    out.substeps = tg.substeps;
    for (double t : tg.t_points)
        if (t > t_shift * (1.0 + 1e-14)) out.t_points.push_back(t - t_shift);
    out.validate();
    return out;
}

void SolverConfig::validate() const {
    if (!(picard_tol > 0.0)) throw std::invalid_argument("SolverConfig: picard_tol must be positive");
    if (picard_max_iter < 1) throw std::invalid_argument("SolverConfig: picard_max_iter must be >= 1");
    if (!(blowup_threshold > 0.0)) throw std::invalid_argument("SolverConfig: blowup_threshold must be positive");
    if (!(boundary_mass_tol > 0.0)) throw std::invalid_argument("SolverConfig: boundary_mass_tol must be positive");
    if (!(stiffness_limit > 0.0)) throw std::invalid_argument("SolverConfig: stiffness_limit must be positive");
    for (double q : norm_qs)
        if (!(q >= 1.0)) throw std::invalid_argument("SolverConfig: norm exponents must be >= 1");
}

double Trajectory::norm(std::size_t index, double q) const {
    if (index >= times.size()) throw std::out_of_range("Trajectory::norm: index out of range");
    for (std::size_t j = 0; j < norm_qs.size(); ++j)
        if (norm_qs[j] == q && index < lq_norms.size()) return lq_norms[index][j];
    if (index >= states.size()) throw std::invalid_argument("Trajectory::norm: q not cached and state not stored");
    return lp_norm(states[index], q);
}

std::size_t Trajectory::index_of(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
    throw std::invalid_argument("Trajectory: time " + std::to_string(t) + " is not a grid time");
}

double high_band_energy_fraction(const Field& f) {
    const auto spec = forward_transform(f);
    const GridSpec& g = f.grid();
    const int N = g.points_per_axis;
    double total = 0.0;
    double high = 0.0;
    for (std::size_t flat = 0; flat < spec.coeffs.size(); ++flat) {
        const double e = std::norm(spec.coeffs[flat]);
        total += e;
        const auto idx = g.unravel(flat);
        for (int a = 0; a < g.dimension; ++a) {
            if (3 * std::abs(wavenumber(idx[a], N)) > N) {
                high += e;
                break;
            }
        }
    }
    return total == 0.0 ? 0.0 : high / total;
}

namespace {

struct SourceEval {
    cvec coeffs;
    bool overflow = false;
    double clamp = 0.0;
};

/// Exponential midpoint panels for one problem; holds the cached symbol.
class PanelIntegrator {
public:
    PanelIntegrator(const ProblemSpec& spec, const SolverConfig& cfg)
        : spec_(spec), cfg_(cfg), prop_(spec.grid, spec.diffusion),
          cap_(std::pow(cfg.blowup_threshold, 1.0 / spec.nonlin.r)) {}

    const SemigroupPropagator& propagator() const { return prop_; }

    /// Spectrum of f(u); negative samples are clamped in unsigned mode.
    SourceEval source(const Field& u) const {
        SourceEval out;
        std::vector<double> vals(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            double v = u[i];
            if (!spec_.nonlin.signed_mode && v < 0.0) {
                out.clamp = std::max(out.clamp, -v);
                v = 0.0;
            }
            if (!(std::abs(v) <= cap_)) {
                out.overflow = true;
                v = std::isfinite(v) ? std::copysign(cap_, v) : cap_;
            }
            vals[i] = nonlinearity_value(v, spec_.nonlin);
        }
        out.coeffs = forward_transform(Field(u.grid(), std::move(vals))).coeffs;
        return out;
    }

    double max_derivative(const Field& u) const {
        double m = 0.0;
        for (double v : u.values()) {
            double w = spec_.nonlin.signed_mode ? v : std::max(v, 0.0);
            w = std::min(std::abs(w), cap_);
            m = std::max(m, nonlinearity_derivative(w, spec_.nonlin));
        }
        return m;
    }

    bool tripped(const Field& u) const {
        for (double v : u.values())
            if (!(std::abs(v) <= cap_)) return true;
        return false;
    }

    /// e^{-dA} u_hat + d phi1(dA) src, back in real space.
    Field combine(const cvec& u_hat, const cvec& src, double d) const {
        SpectralField out{spec_.grid, cvec(u_hat.size())};
        const auto sym = prop_.symbol();
        for (std::size_t i = 0; i < u_hat.size(); ++i) {
            const double z = d * sym[i];
            out.coeffs[i] = u_hat[i] * std::exp(-z) + src[i] * (d * phi1(z));
        }
        return inverse_transform(out);
    }

    Field linear(const cvec& u_hat, double d) const {
        SpectralField out{spec_.grid, u_hat};
        prop_.multiply_semigroup(out.coeffs, d);
        return inverse_transform(out);
    }

    /// One panel [t, t + d]; returns false on overflow of the source.
    bool panel(Field& u, double t, double d, double& clamp) const {
        const cvec u_hat = forward_transform(u).coeffs;
        if (t == 0.0) {
            // Right-endpoint rule: the data may be too rough for a midpoint predictor.
            const Field pred = linear(u_hat, d);
            const SourceEval f_pred = source(pred);
            clamp = std::max(clamp, f_pred.clamp);
            if (f_pred.overflow) return false;
            u = combine(u_hat, f_pred.coeffs, d);
            return true;
        }
        const SourceEval f_left = source(u);
        clamp = std::max(clamp, f_left.clamp);
        if (f_left.overflow) return false;
        const Field mid = combine(u_hat, f_left.coeffs, 0.5 * d);
        const SourceEval f_mid = source(mid);
        clamp = std::max(clamp, f_mid.clamp);
        if (f_mid.overflow) return false;
        u = combine(u_hat, f_mid.coeffs, d);
        return true;
    }

    StepResult step(const Field& u0, double t0, double t1, int substeps) const {
        StepResult res{u0, false, 0.0, 0.0};
        if (!spec_.nonlinear) {
            res.state = prop_.propagate(u0, t1 - t0);
            return res;
        }
        const double nominal = (t1 - t0) / substeps;
        double t = t0;
        for (int p = 0; p < substeps; ++p) {
            const double panel_end = (p + 1 == substeps) ? t1 : t0 + (p + 1) * nominal;
            long sub_count = 0;
            while (t < panel_end) {
                double d = panel_end - t;
                const double stiff = max_derivative(res.state);
                if (stiff * d > cfg_.stiffness_limit) d = cfg_.stiffness_limit / stiff;
                // Steps collapsing to round-off mean the source is running away.
                if (d <= 1e-14 * std::max(1.0, t) || ++sub_count > kMaxSubpanels) {
                    res.blowup = true;
                    res.blowup_time = t;
                    return res;
                }
                const bool ok = panel(res.state, t, d, res.max_clamp);
                t = (d == panel_end - t) ? panel_end : t + d;
                if (!ok || tripped(res.state)) {
                    res.blowup = true;
                    res.blowup_time = t;
                    return res;
                }
            }
        }
        return res;
    }

private:
    static constexpr long kMaxSubpanels = 200000;

    const ProblemSpec& spec_;
    const SolverConfig& cfg_;
    SemigroupPropagator prop_;
    double cap_;
};

void record_state(Trajectory& traj, double t, const Field& u, const SolverConfig& cfg) {
    traj.times.push_back(t);
    traj.mass_series.push_back(u.integral());
    std::vector<double> row;
    row.reserve(cfg.norm_qs.size());
    for (double q : cfg.norm_qs) row.push_back(lp_norm(u, q));
    traj.lq_norms.push_back(std::move(row));
    if (cfg.track_orlicz) traj.orlicz_norms.push_back(luxemburg_norm(u, OrliczParams{traj.problem.nonlin.r}));
    traj.max_high_band_fraction = std::max(traj.max_high_band_fraction, high_band_energy_fraction(u));
    if (cfg.store_states) {
        traj.states.push_back(u);
    } else {
        traj.states.assign(1, u);
    }
}

void finish_diagnostics(Trajectory& traj, const SolverConfig& cfg) {
    if (traj.max_high_band_fraction > 1e-8) {
        std::ostringstream os;
        os << "top-third spectral band carries " << traj.max_high_band_fraction << " of the energy";
        traj.warnings.push_back(os.str());
    }
    if (traj.max_clamp > 0.0) {
        std::ostringstream os;
        os << "clamped negative excursions up to " << traj.max_clamp << " before evaluating f";
        traj.warnings.push_back(os.str());
    }
    if (traj.blowup_time) return;
    traj.boundary_mass_fraction = boundary_mass_fraction(traj.states.back());
    if (traj.boundary_mass_fraction > cfg.boundary_mass_tol) {
        std::ostringstream os;
        os << "boundary mass fraction " << traj.boundary_mass_fraction << " exceeds " << cfg.boundary_mass_tol
           << " at t = " << traj.times.back() << "; enlarge L";
        throw BoundaryMassViolation(os.str(), traj.boundary_mass_fraction);
    }
}

} // namespace

StepResult duhamel_step(const Field& u0, double t0, double t1, const ProblemSpec& spec, int substeps,
                        const SolverConfig& cfg) {
    if (!(t1 > t0) || !(t0 >= 0.0)) throw std::invalid_argument("duhamel_step: need t1 > t0 >= 0");
    if (substeps < 1) throw std::invalid_argument("duhamel_step: substeps must be >= 1");
    if (!u0.all_finite()) throw std::invalid_argument("duhamel_step: non-finite state");
    spec.diffusion.validate();
    spec.nonlin.validate();
    const PanelIntegrator integrator(spec, cfg);
    return integrator.step(u0, t0, t1, substeps);
}

Trajectory integrate(const ProblemSpec& spec, const TimeGrid& tg, const SolverConfig& cfg) {
    spec.validate();
    tg.validate();
    cfg.validate();
    if (cfg.mode != SolverMode::time_march) throw std::invalid_argument("integrate: config mode must be time_march");

    Trajectory traj;
    traj.problem = spec;
    traj.norm_qs = cfg.norm_qs;
    const PanelIntegrator integrator(spec, cfg);

    Field u = spec.initial;
    record_state(traj, 0.0, u, cfg);
    double t_prev = 0.0;
    for (double t : tg.t_points) {
        StepResult step = integrator.step(u, t_prev, t, tg.substeps);
        traj.max_clamp = std::max(traj.max_clamp, step.max_clamp);
        if (step.blowup) {
            traj.blowup_time = step.blowup_time;
            break;
        }
        u = std::move(step.state);
        record_state(traj, t, u, cfg);
        t_prev = t;
    }
    finish_diagnostics(traj, cfg);
    return traj;
}

PicardResult picard_solve(const ProblemSpec& spec, const TimeGrid& tg, const SolverConfig& cfg) {
    spec.validate();
    tg.validate();
    cfg.validate();
    if (cfg.mode != SolverMode::global_picard) throw std::invalid_argument("picard_solve: config mode must be global_picard");
    if (spec.initial.min() < 0.0) throw std::invalid_argument("picard_solve: initial data must be nonnegative");

    // Panels of every interval, and which node closes each output interval.
    std::vector<double> starts, widths;
    std::vector<std::size_t> output_nodes;
    double t_prev = 0.0;
    for (double t : tg.t_points) {
        const double d = (t - t_prev) / tg.substeps;
        for (int p = 0; p < tg.substeps; ++p) {
            starts.push_back(t_prev + p * d);
            widths.push_back(p + 1 == tg.substeps ? t - (t_prev + p * d) : d);
        }
        output_nodes.push_back(starts.size());
        t_prev = t;
    }
    const std::size_t panels = starts.size();
    const double bytes = 2.0 * (2.0 * panels + 1.0) * static_cast<double>(spec.grid.size()) * sizeof(double);
    if (bytes > static_cast<double>(memory_budget_bytes()))
        throw std::invalid_argument("picard_solve: stored iterates exceed the memory budget");

    const PanelIntegrator integ(spec, cfg);
    const bool nonlinear = spec.nonlinear;

    // v_0: pure semigroup at every node and midpoint.
    std::vector<Field> nodes(panels + 1), mids(panels);
    nodes[0] = spec.initial;
    for (std::size_t m = 0; m < panels; ++m) {
        const cvec hat = forward_transform(nodes[m]).coeffs;
        mids[m] = integ.linear(hat, starts[m] == 0.0 ? widths[m] : 0.5 * widths[m]);
        nodes[m + 1] = integ.linear(hat, widths[m]);
    }

    PicardResult result;
    bool converged = false;
    for (int iter = 1; iter <= cfg.picard_max_iter; ++iter) {
        std::vector<Field> new_nodes(panels + 1), new_mids(panels);
        new_nodes[0] = spec.initial;
        double clamp = 0.0;
        for (std::size_t m = 0; m < panels; ++m) {
            const double d = widths[m];
            const cvec hat = forward_transform(new_nodes[m]).coeffs;
            if (!nonlinear) {
                new_mids[m] = mids[m];
                new_nodes[m + 1] = integ.linear(hat, d);
                continue;
            }
            if (starts[m] == 0.0) {
                new_mids[m] = integ.linear(hat, d);
            } else {
                const SourceEval f_left = integ.source(nodes[m]);
                if (f_left.overflow) throw BlowupError("picard_solve: source overflow", starts[m]);
                clamp = std::max(clamp, f_left.clamp);
                new_mids[m] = integ.combine(hat, f_left.coeffs, 0.5 * d);
            }
            const SourceEval f_mid = integ.source(mids[m]);
            if (f_mid.overflow) throw BlowupError("picard_solve: source overflow", starts[m] + 0.5 * d);
            clamp = std::max(clamp, f_mid.clamp);
            new_nodes[m + 1] = integ.combine(hat, f_mid.coeffs, d);
        }

        double gap = 0.0;
        for (std::size_t node : output_nodes)
            for (std::size_t i = 0; i < spec.grid.size(); ++i)
                gap = std::max(gap, std::abs(new_nodes[node][i] - nodes[node][i]));
        double worst = 0.0;
        for (std::size_t m = 0; m <= panels; ++m)
            for (std::size_t i = 0; i < spec.grid.size(); ++i) {
                worst = std::min(worst, new_nodes[m][i] - nodes[m][i]);
                if (m < panels) worst = std::min(worst, new_mids[m][i] - mids[m][i]);
            }
        result.gaps.push_back(gap);
        result.monotonicity_violations.push_back(-worst);
        result.trajectory.max_clamp = std::max(result.trajectory.max_clamp, clamp);
        nodes = std::move(new_nodes);
        mids = std::move(new_mids);
        result.iterations = iter;
        if (gap < cfg.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "picard_solve: no convergence in " << cfg.picard_max_iter << " iterations (last gap "
           << result.gaps.back() << "); data too large";
        throw PicardNonConvergence(os.str());
    }

    Trajectory& traj = result.trajectory;
    traj.problem = spec;
    traj.norm_qs = cfg.norm_qs;
    record_state(traj, 0.0, spec.initial, cfg);
    for (std::size_t k = 0; k < output_nodes.size(); ++k) record_state(traj, tg.t_points[k], nodes[output_nodes[k]], cfg);
    finish_diagnostics(traj, cfg);
    return result;
}

ProblemSpec shifted_restart(const Trajectory& traj, double t_shift) {
    if (!(t_shift > 0.0)) throw std::invalid_argument("shifted_restart: t_shift must be positive");
    const std::size_t i = traj.index_of(t_shift);
    if (i >= traj.states.size()) throw std::invalid_argument("shifted_restart: state at t_shift was not stored");
    ProblemSpec out = traj.problem;
    out.initial = traj.states[i];
    // Ringing can leave round-off negatives that the nonnegativity check would reject.
    if (!out.nonlin.signed_mode && out.nonlinear) {
        const double floor = -1e-12 * out.initial.max_abs();
        for (double& v : out.initial.values())
            if (v < 0.0 && v >= floor) v = 0.0;
    }
    return out;
}

} // namespace expheat
