#include "expheat/decay_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "expheat/orlicz.hpp"

namespace expheat {

PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
    if (t.size() < 2) throw std::invalid_argument("fit_power_law: need at least two points");
    const double n = static_cast<double>(t.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_power_law: values must be positive");
        sx += std::log(t[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double dx = std::log(t[i]) - mx;
        const double dy = std::log(y[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_power_law: all times coincide");
    PowerLawFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = std::log(y[i]) - (fit.intercept + fit.slope * std::log(t[i]));
        ss_res += r * r;
    }
    // A flat series fitted exactly counts as a perfect fit.
    fit.r_squared = syy <= std::numeric_limits<double>::min() ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    fit.points = static_cast<int>(t.size());
    return fit;
}

double theoretical_exponent(int n, double theta, double p_star, double q) {
    if (!(p_star >= 1.0)) throw std::invalid_argument("theoretical_exponent: p_star must be >= 1");
    if (!(q >= p_star)) throw std::invalid_argument("theoretical_exponent: need q >= p_star");
    if (!(theta > 0.0 && theta <= 2.0)) throw std::invalid_argument("theoretical_exponent: theta must lie in (0, 2]");
    const double inv_q = q == kInf ? 0.0 : 1.0 / q;
    return (n / theta) * (1.0 / p_star - inv_q);
}

ExponentSelection exponent_selector(double p, int n, double theta, double r) {
    if (!(r > 1.0)) throw std::invalid_argument("exponent_selector: r must exceed 1");
    if (!(p >= 1.0 && p <= r)) throw std::invalid_argument("exponent_selector: p must lie in [1, r]");
    const double critical = r * n / (n + r * theta);
    ExponentSelection sel;
    sel.p_star = std::max(p, critical);
    sel.p1 = std::max(1.0, critical);
    sel.p2 = std::max(sel.p_star * n / (n + r * theta), 1.0);
    return sel;
}

std::pair<double, double> default_fit_window(const Trajectory& traj) {
    if (traj.times.empty()) throw std::invalid_argument("default_fit_window: empty trajectory");
    const double T = traj.times.back();
    return {T / 100.0, T};
}

DecayReport fit_decay(const Trajectory& traj, double q, std::pair<double, double> window,
                      std::optional<double> theoretical) {
    std::vector<double> ts, ys;
    const double tol = 1e-12;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t <= 0.0 || t < window.first * (1.0 - tol) || t > window.second * (1.0 + tol)) continue;
        const double y = traj.norm(i, q);
        if (!(y > 0.0)) throw std::invalid_argument("fit_decay: vanishing norm inside the window");
        ts.push_back(t);
        ys.push_back(y);
    }
    if (static_cast<int>(ts.size()) < kMinFitPoints)
        throw std::invalid_argument("fit_decay: fewer than 8 trajectory points inside the window");
    const PowerLawFit fit = fit_power_law(ts, ys);
    DecayReport rep;
    rep.q = q;
    rep.fitted_exponent = -fit.slope;
    rep.intercept = fit.intercept;
    rep.r_squared = fit.r_squared;
    rep.fit_window = window;
    rep.points = fit.points;
    rep.theoretical_exponent = theoretical.value_or(std::numeric_limits<double>::quiet_NaN());
    return rep;
}

AsymptoticsReport mass_asymptotics(const Trajectory& traj, std::span<const double> qs) {
    if (traj.blowup_time) throw std::invalid_argument("mass_asymptotics: trajectory blew up");
    if (traj.times.size() < 3) throw std::invalid_argument("mass_asymptotics: trajectory too short");
    if (traj.states.size() != traj.times.size())
        throw std::invalid_argument("mass_asymptotics: states must be stored");
    if (traj.problem.initial.min() < -1e-12 * traj.problem.initial.max_abs())
        throw std::invalid_argument("mass_asymptotics: initial data must be nonnegative");

    AsymptoticsReport rep;
    rep.times = traj.times;
    rep.mass = traj.mass_series;
    const std::size_t last = traj.times.size() - 1;
    const double T = traj.times[last];
    rep.m_final = rep.mass[last];

    // Tail m_star - m(t) ~ C / t, matched between T/2 and T.
    std::size_t half = 0;
    for (std::size_t i = 1; i < last; ++i)
        if (std::abs(traj.times[i] - 0.5 * T) < std::abs(traj.times[half] - 0.5 * T)) half = i;
    double tail_coef = 0.0;
    if (half > 0 && traj.times[half] > 0.0) {
        tail_coef = (rep.mass[last] - rep.mass[half]) / (1.0 / traj.times[half] - 1.0 / T);
    }
    rep.m_star_estimate = rep.m_final + std::max(tail_coef, 0.0) / T;
    rep.mass_tail.reserve(rep.mass.size());
    for (double m : rep.mass) rep.mass_tail.push_back(rep.m_star_estimate - m);

    const GridSpec& grid = traj.problem.grid;
    const DiffusionSpec& diff = traj.problem.diffusion;
    const double n = grid.dimension;
    rep.profile_qs.assign(qs.begin(), qs.end());
    rep.profile_errors.assign(qs.size(), std::vector<double>(traj.times.size(), std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t <= 0.0) continue;
        const Field kernel = diffusion_kernel_field(grid, diff, t + 1.0);
        std::vector<double> diff_vals(grid.size());
        for (std::size_t k = 0; k < diff_vals.size(); ++k)
            diff_vals[k] = traj.states[i][k] - rep.m_star_estimate * kernel[k];
        const Field residual(grid, std::move(diff_vals));
        for (std::size_t j = 0; j < qs.size(); ++j) {
            const double inv_q = qs[j] == kInf ? 0.0 : 1.0 / qs[j];
            rep.profile_errors[j][i] = std::pow(t, (n / diff.theta) * (1.0 - inv_q)) * lp_norm(residual, qs[j]);
        }
    }
    return rep;
}

PowerLawFit fit_mass_tail(const AsymptoticsReport& report, std::pair<double, double> window) {
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        const double t = report.times[i];
        if (t <= 0.0 || t < window.first || t > window.second) continue;
        if (!(report.mass_tail[i] > 0.0)) continue;
        ts.push_back(t);
        ys.push_back(report.mass_tail[i]);
    }
    if (static_cast<int>(ts.size()) < kMinFitPoints)
        throw std::invalid_argument("fit_mass_tail: fewer than 8 positive tail points inside the window");
    return fit_power_law(ts, ys);
}

bool decreasing_over(std::span<const double> times, std::span<const double> series, double t_lo, double t_hi) {
    double prev = std::numeric_limits<double>::infinity();
    int seen = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi) continue;
        if (!(series[i] <= prev)) return false;
        prev = series[i];
        ++seen;
    }
    return seen >= 2;
}

namespace {

/// Periodic sinc for an even number of samples on a period of 2L.
double periodic_sinc(double d, const GridSpec& g) {
    const double h = g.spacing();
    const double cells = d / h;
    const double nearest = std::round(cells);
    if (std::abs(cells - nearest) < 1e-12) {
        const long k = static_cast<long>(nearest);
        return (k % g.points_per_axis == 0) ? 1.0 : 0.0;
    }
    return std::sin(std::numbers::pi * cells) /
           (g.points_per_axis * std::tan(std::numbers::pi * d / (2.0 * g.half_width)));
}

/// Applies the same N x N matrix along every axis of a row-major field.
std::vector<double> apply_separable(const std::vector<double>& in, const GridSpec& g, const std::vector<double>& mat) {
    const int N = g.points_per_axis;
    std::vector<double> cur(in), next(in.size());
    std::vector<double> line(N);
    for (int axis = 0; axis < g.dimension; ++axis) {
        std::size_t stride = 1;
        for (int a = axis + 1; a < g.dimension; ++a) stride *= N;
        for (std::size_t flat = 0; flat < cur.size(); ++flat) {
            if (g.unravel(flat)[axis] != 0) continue;
            for (int j = 0; j < N; ++j) line[j] = cur[flat + j * stride];
            for (int i = 0; i < N; ++i) {
                double s = 0.0;
                const double* row = &mat[static_cast<std::size_t>(i) * N];
                for (int j = 0; j < N; ++j) s += row[j] * line[j];
                next[flat + i * stride] = s;
            }
        }
        std::swap(cur, next);
    }
    return cur;
}

} // namespace

Field dilation_family(const Field& phi, double lambda, double p) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("dilation_family: lambda must be positive");
    if (!(p >= 1.0)) throw std::invalid_argument("dilation_family: p must be >= 1");
    const GridSpec& g = phi.grid();
    const int N = g.points_per_axis;
    const int c = g.center_index();
    const double scale = std::pow(lambda, g.dimension / p);
    if (lambda == 1.0) return phi;

    const double log2l = std::log2(lambda);
    const bool dyadic_up = lambda > 1.0 && std::abs(log2l - std::round(log2l)) < 1e-12;
    if (dyadic_up) {
        const long factor = 1L << static_cast<int>(std::round(log2l));
        std::vector<double> out(phi.size(), 0.0);
        for (std::size_t flat = 0; flat < out.size(); ++flat) {
            auto idx = g.unravel(flat);
            bool inside = true;
            for (int a = 0; a < g.dimension; ++a) {
                const long src = (idx[a] - c) * factor + c;
                if (src < 0 || src >= N) {
                    inside = false;
                    break;
                }
                idx[a] = static_cast<int>(src);
            }
            if (inside) out[flat] = scale * phi[g.ravel(idx)];
        }
        return Field(g, std::move(out));
    }

    if (lambda < 1.0) {
        // phi is only seen on |x_a| < lambda L; anything outside would be lost.
        const double limit = lambda * g.half_width;
        const double peak = phi.max_abs();
        for (std::size_t flat = 0; flat < phi.size(); ++flat) {
            const auto idx = g.unravel(flat);
            for (int a = 0; a < g.dimension; ++a) {
                if (std::abs(g.coordinate(idx[a])) >= limit && std::abs(phi[flat]) > 1e-10 * peak)
                    throw std::invalid_argument("dilation_family: support of phi does not fit the dilated box");
            }
        }
    }

    std::vector<double> mat(static_cast<std::size_t>(N) * N, 0.0);
    for (int i = 0; i < N; ++i) {
        const double y = lambda * g.coordinate(i);
        if (y < -g.half_width || y >= g.half_width) continue;
        for (int j = 0; j < N; ++j) mat[static_cast<std::size_t>(i) * N + j] = periodic_sinc(y - g.coordinate(j), g);
    }
    std::vector<double> vals(phi.values().begin(), phi.values().end());
    auto out = apply_separable(vals, g, mat);
    const bool nonnegative = phi.min() >= 0.0;
    for (double& v : out) v = nonnegative ? std::max(v, 0.0) * scale : v * scale;
    return Field(g, std::move(out));
}

SupercriticalReport supercritical_probe(const Field& phi, double r, const TimeGrid& tg, const SolverConfig& cfg) {
    if (!(r > 1.0)) throw std::invalid_argument("supercritical_probe: r must exceed 1");
    const int n = phi.grid().dimension;
    ProblemSpec spec;
    spec.grid = phi.grid();
    spec.diffusion = DiffusionSpec{2.0, n};
    spec.nonlin = NonlinearitySpec{r, 2.0, n};
    spec.initial = phi;
    spec.nonlinear = true;

    SolverConfig run_cfg = cfg;
    run_cfg.mode = SolverMode::time_march;
    run_cfg.track_orlicz = false;
    run_cfg.store_states = true;
    const Trajectory traj = integrate(spec, tg, run_cfg);

    SupercriticalReport rep;
    rep.r = r;
    rep.blowup = traj.blowup_time.has_value();
    rep.blowup_time = traj.blowup_time;
    rep.initial_linf = phi.max_abs();
    const OrliczParams exp_l2{2.0};
    rep.initial_orlicz = luxemburg_norm(phi, exp_l2);
    for (const Field& s : traj.states) {
        rep.max_linf = std::max(rep.max_linf, s.max_abs());
        rep.sup_orlicz = std::max(rep.sup_orlicz, luxemburg_norm(s, exp_l2));
    }
    rep.linf_growth = rep.initial_linf > 0.0 ? rep.max_linf / rep.initial_linf : 0.0;
    rep.smallness_bound_held = !rep.blowup && rep.sup_orlicz <= 2.0 * rep.initial_orlicz * (1.0 + 1e-9);
    return rep;
}

AmplitudeSweep amplitude_sweep(const Field& shape, std::span<const double> amplitudes, double r_super,
                               const TimeGrid& tg, const SolverConfig& cfg) {
    if (!(r_super > 2.0)) throw std::invalid_argument("amplitude_sweep: r_super must exceed 2");
    AmplitudeSweep sweep;
    for (double a : amplitudes) {
        SweepRow row;
        row.amplitude = a;
        const Field phi = shape.scaled(a);
        row.supercritical = supercritical_probe(phi, r_super, tg, cfg);
        row.critical = supercritical_probe(phi, 2.0, tg, cfg);
        if (row.supercritical.blowup && !sweep.threshold_amplitude) sweep.threshold_amplitude = a;
        sweep.rows.push_back(std::move(row));
    }
    return sweep;
}

} // namespace expheat
