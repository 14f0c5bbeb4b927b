#include <doctest.h>

#include <cmath>
#include <numbers>

#include "expheat/errors.hpp"
#include "expheat/initial_data.hpp"
#include "expheat/mild_solver.hpp"
#include "expheat/orlicz.hpp"
#include "helpers.hpp"

using namespace expheat;

namespace {

ProblemSpec gaussian_problem(const GridSpec& g, double amplitude, double theta = 2.0, bool nonlinear = true) {
    DataRecipe bump;
    bump.amplitude = amplitude;
    bump.width = 1.0;
    return ProblemSpec{g, DiffusionSpec{theta, g.dimension}, NonlinearitySpec{2.0, theta, g.dimension},
                       generate(bump, g), nonlinear};
}

double sup_gap(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_SUITE("mild_solver") {

TEST_CASE("time grids") {
    const TimeGrid tg = make_time_grid(0.01, 16, 1.15, 1000.0, 4);
    CHECK(tg.t_points.front() == doctest::Approx(0.01 / 16));
    CHECK(tg.t_points.back() == 1000.0);
    for (std::size_t i = 1; i < tg.t_points.size(); ++i) CHECK(tg.t_points[i] > tg.t_points[i - 1]);
    const TimeGrid sh = shifted_time_grid(tg, tg.t_points[20]);
    CHECK(sh.t_points.front() == doctest::Approx(tg.t_points[21] - tg.t_points[20]));
    CHECK_THROWS_AS(make_time_grid(0.01, 16, 3.0, 10.0, 4), std::invalid_argument);
}

TEST_CASE("duhamel_step reductions") {
    const GridSpec g = make_grid(1, 256, 16.0);
    const ProblemSpec lin = gaussian_problem(g, 0.8, 2.0, false);
    const StepResult r = duhamel_step(lin.initial, 0.2, 1.1, lin, 4);
    CHECK(sup_gap(r.state, apply_semigroup(lin.initial, 0.9, lin.diffusion)) < 1e-15);
    ProblemSpec zero = gaussian_problem(g, 0.8);
    zero.initial = Field(g);
    CHECK(duhamel_step(zero.initial, 0.0, 1.0, zero, 4).state.max_abs() == 0.0);
}

TEST_CASE("second-order convergence of the panel rule") {
    const GridSpec g = make_grid(1, 512, 16.0);
    const ProblemSpec spec = gaussian_problem(g, 0.5);
    const Field u0 = duhamel_step(spec.initial, 0.0, 0.1, spec, 8).state;
    const Field ref = duhamel_step(u0, 0.1, 0.6, spec, 16).state;
    const double e1 = sup_gap(duhamel_step(u0, 0.1, 0.6, spec, 1).state, ref);
    const double e2 = sup_gap(duhamel_step(u0, 0.1, 0.6, spec, 2).state, ref);
    const double e4 = sup_gap(duhamel_step(u0, 0.1, 0.6, spec, 4).state, ref);
    const double order = std::log2(e2 / e4);
    MESSAGE("errors " << e1 << " " << e2 << " " << e4 << " order " << order);
    CHECK(order >= 1.7);
    CHECK(order <= 2.3);
    CHECK(0.5 * std::log2(e1 / e4) >= 1.7);
}

TEST_CASE("zero data stays zero") {
    const GridSpec g = make_grid(1, 128, 8.0);
    ProblemSpec spec = gaussian_problem(g, 0.0);
    const Trajectory traj = integrate(spec, make_time_grid(0.01, 4, 1.5, 5.0, 2));
    for (const auto& row : traj.lq_norms)
        for (double v : row) CHECK(v == 0.0);
    CHECK_FALSE(traj.blowup_time.has_value());
}

TEST_CASE("linear cell data follows the kernel peak") {
    const GridSpec g = make_grid(1, 2048, 128.0);
    ProblemSpec spec{g, DiffusionSpec{2.0, 1}, NonlinearitySpec{2.0, 2.0, 1}, testing_support::cell_mass(g), false};
    const Trajectory traj = integrate(spec, make_time_grid(0.01, 16, 1.15, 50.0, 4));
    int checked = 0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t < 1.0) continue;
        CHECK(traj.norm(i, kInf) == doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi * t)).epsilon(0.02));
        ++checked;
    }
    CHECK(checked > 20);
    CHECK(traj.mass_series.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("small data keep the Orlicz norm below twice the initial norm") {
    const GridSpec g = make_grid(1, 1024, 64.0);
    ProblemSpec spec = gaussian_problem(g, 1.0);
    spec.initial = spec.initial.scaled(0.05 / luxemburg_norm(spec.initial));
    const Trajectory traj = integrate(spec, make_time_grid(0.01, 16, 1.15, 10.0, 4));
    const double phi = luxemburg_norm(spec.initial);
    for (double v : traj.orlicz_norms) CHECK(v <= 2.0 * phi);
    for (std::size_t i = 1; i < traj.mass_series.size(); ++i) CHECK(traj.mass_series[i] >= traj.mass_series[i - 1]);
}

TEST_CASE("boundary mass and blowup") {
    const GridSpec g = make_grid(1, 256, 8.0);
    ProblemSpec wide = gaussian_problem(g, 0.3);
    CHECK_THROWS_AS(integrate(wide, make_time_grid(0.01, 8, 1.3, 20.0, 2)), BoundaryMassViolation);

    const GridSpec g2 = make_grid(1, 512, 32.0);
    const ProblemSpec big = gaussian_problem(g2, 3.0);
    const Trajectory traj = integrate(big, make_time_grid(0.01, 8, 1.3, 1.0, 2));
    REQUIRE(traj.blowup_time.has_value());
    CHECK(*traj.blowup_time < 1.0);
    CHECK(traj.times.back() <= *traj.blowup_time);
}

TEST_CASE("global Picard iteration") {
    const GridSpec g = make_grid(1, 1024, 64.0);
    const TimeGrid tg = make_time_grid(0.01, 8, 1.2, 4.0, 4);
    SolverConfig cfg;
    cfg.mode = SolverMode::global_picard;

    ProblemSpec zero = gaussian_problem(g, 0.0);
    const PicardResult z = picard_solve(zero, tg, cfg);
    CHECK(z.iterations == 1);

    const ProblemSpec spec = gaussian_problem(g, 0.6);
    const PicardResult pic = picard_solve(spec, tg, cfg);
    for (double v : pic.monotonicity_violations) CHECK(v < 1e-10);
    for (std::size_t j = 1; j < pic.gaps.size(); ++j)
        if (pic.gaps[j - 1] > 1e-13) CHECK(pic.gaps[j] < 0.5 * pic.gaps[j - 1]);
    const Trajectory march = integrate(spec, tg, SolverConfig{});
    TimeGrid fine = tg;
    fine.substeps = 8;
    const Trajectory march_fine = integrate(spec, fine, SolverConfig{});
    double step_err = 0.0, gap = 0.0;
    for (std::size_t i = 0; i < march.states.size(); ++i) {
        step_err = std::max(step_err, sup_gap(march.states[i], march_fine.states[i]));
        gap = std::max(gap, sup_gap(march.states[i], pic.trajectory.states[i]));
    }
    CHECK(gap <= 10.0 * std::max(cfg.picard_tol, step_err));

    SolverConfig wrong;
    CHECK_THROWS_AS(picard_solve(spec, tg, wrong), std::invalid_argument);
}

TEST_CASE("shifted restart") {
    const GridSpec g = make_grid(1, 1024, 64.0);
    const TimeGrid tg = make_time_grid(0.01, 8, 1.2, 4.0, 4);
    const ProblemSpec spec = gaussian_problem(g, 0.8);
    const Trajectory traj = integrate(spec, tg);
    const double ts = tg.t_points[12];
    const ProblemSpec restart = shifted_restart(traj, ts);
    const Trajectory tail = integrate(restart, shifted_time_grid(tg, ts));
    TimeGrid fine = tg;
    fine.substeps = 8;
    const Trajectory traj_fine = integrate(spec, fine);
    double step_err = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        step_err = std::max(step_err, sup_gap(traj.states[i], traj_fine.states[i]));
    const std::size_t offset = traj.index_of(ts);
    for (std::size_t k = 0; k < tail.times.size(); ++k) {
        CHECK(tail.times[k] + ts == doctest::Approx(traj.times[offset + k]));
        CHECK(sup_gap(tail.states[k], traj.states[offset + k]) <= 10.0 * step_err + 1e-14);
    }

    const ProblemSpec lin = gaussian_problem(g, 0.8, 2.0, false);
    const Trajectory lt = integrate(lin, tg);
    const double t1 = lt.times[1];
    const ProblemSpec lr = shifted_restart(lt, t1);
    CHECK(sup_gap(lr.initial, apply_semigroup(lin.initial, t1, lin.diffusion)) < 1e-10);

    const Trajectory zt = integrate(gaussian_problem(g, 0.0), tg);
    CHECK(shifted_restart(zt, tg.t_points[3]).initial.max_abs() == 0.0);
}

TEST_CASE("high-band energy diagnostic") {
    std::mt19937_64 rng(2);
    const GridSpec g = make_grid(1, 256, 16.0);
    CHECK(high_band_energy_fraction(gaussian_problem(g, 1.0).initial) < 1e-12);
    CHECK(high_band_energy_fraction(testing_support::noise(g, rng, -1, 1)) > 0.1);
}

}
