#include <doctest.h>

#include <cmath>
#include <numbers>

#include "expheat/semigroup.hpp"
#include "helpers.hpp"

using namespace expheat;

TEST_SUITE("semigroup") {

TEST_CASE("t = 0 and constants") {
    std::mt19937_64 rng(5);
    const GridSpec g = make_grid(1, 128, 8.0);
    const Field f = testing_support::noise(g, rng, -1.0, 1.0);
    const Field same = apply_semigroup(f, 0.0, DiffusionSpec{1.5, 1});
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(same[i] == doctest::Approx(f[i]).epsilon(1e-12));
    const Field c(g, std::vector<double>(g.size(), 0.7));
    const Field cc = apply_semigroup(c, 3.0, DiffusionSpec{2.0, 1});
    for (double v : cc.values()) CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("cell mass matches the Gaussian kernel at t = 1") {
    const GridSpec g = make_grid(1, 1024, 16.0);
    const Field u = apply_semigroup(testing_support::cell_mass(g), 1.0, DiffusionSpec{2.0, 1});
    double err = 0.0;
    for (int i = 0; i < 1024; ++i) {
        const double x = g.coordinate(i);
        err = std::max(err, std::abs(u[i] - std::exp(-x * x / 4.0) / std::sqrt(4.0 * std::numbers::pi)));
    }
    CHECK(err < 1e-4);
}

TEST_CASE("gaussian_kernel values") {
    const double zero[1] = {0.0};
    CHECK(gaussian_kernel(2.5, zero) == doctest::Approx(1.0 / std::sqrt(10.0 * std::numbers::pi)));
    CHECK(gaussian_kernel(1.0 / (4.0 * std::numbers::pi), zero) == doctest::Approx(1.0).epsilon(1e-14));
    const GridSpec g = make_grid(1, 1024, 16.0);
    CHECK(std::abs(gaussian_kernel_field(g, 1.0).integral() - 1.0) < 1e-10);
    const GridSpec g2 = make_grid(2, 256, 16.0);
    CHECK(std::abs(gaussian_kernel_field(g2, 0.5).integral() - 1.0) < 1e-10);
}

TEST_CASE("fractional kernel for theta = 1 is the periodic Poisson kernel") {
    // sum_m (1/pi) t / (t^2 + (x + 2mL)^2) = sinh(pi t / L) / (2L (cosh(pi t / L) - cos(pi x / L))).
    const GridSpec g = make_grid(1, 4096, 64.0);
    const double t = 1.0, L = 64.0;
    const Field k = diffusion_kernel_field(g, DiffusionSpec{1.0, 1}, t);
    double err = 0.0, peak = 0.0;
    for (int i = 0; i < 4096; ++i) {
        const double x = g.coordinate(i);
        const double a = std::numbers::pi * t / L;
        const double exact = std::sinh(a) / (2.0 * L * (std::cosh(a) - std::cos(std::numbers::pi * x / L)));
        err = std::max(err, std::abs(k[i] - exact));
        peak = std::max(peak, exact);
    }
    CHECK(err / peak < 1e-3);
    // Same kernel through the propagator applied to a cell mass.
    const Field u = apply_semigroup(testing_support::cell_mass(g), t, DiffusionSpec{1.0, 1});
    double gap = 0.0;
    for (int i = 0; i < 4096; ++i) gap = std::max(gap, std::abs(u[i] - k[i]));
    CHECK(gap / peak < 1e-10);
}

TEST_CASE("closed form kernel agrees with the synthesized one for theta = 2") {
    const GridSpec g = make_grid(1, 512, 16.0);
    const Field a = diffusion_kernel_field(g, DiffusionSpec{2.0, 1}, 2.0);
    const Field b = apply_semigroup(testing_support::cell_mass(g), 2.0, DiffusionSpec{2.0, 1});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("semigroup property") {
    std::mt19937_64 rng(17);
    const GridSpec g = make_grid(1, 256, 10.0);
    const Field f = testing_support::noise(g, rng, -1.0, 1.0);
    CHECK(verify_semigroup_property(f, 0.5, 1.0, DiffusionSpec{2.0, 1}) < 1e-12);
    CHECK(verify_semigroup_property(f, 0.3, 1.0, DiffusionSpec{1.5, 1}) < 1e-12);
    CHECK(verify_semigroup_property(Field(g), 0.3, 1.0, DiffusionSpec{1.5, 1}) == 0.0);
    const GridSpec g2 = make_grid(2, 32, 4.0);
    CHECK(verify_semigroup_property(testing_support::noise(g2, rng, 0, 1), 0.2, 0.9, DiffusionSpec{0.5, 2}) < 1e-12);
}

TEST_CASE("smoothing probe") {
    std::mt19937_64 rng(23);
    const GridSpec g = make_grid(1, 512, 16.0);
    const std::vector<double> ts = {0.5, 1.0, 4.0};
    for (int k = 0; k < 5; ++k) {
        const Field f = testing_support::random_bumps(g, rng, k % 2 == 0);
        for (double q : {1.0, 2.0, kInf})
            for (double ratio : smoothing_constant_probe(q, q, DiffusionSpec{2.0, 1}, ts, f)) CHECK(ratio <= 1.0 + 1e-10);
    }
    const GridSpec big = make_grid(1, 4096, 256.0);
    const std::vector<double> late = {200.0, 400.0};
    for (double ratio : smoothing_constant_probe(1.0, kInf, DiffusionSpec{2.0, 1}, late, testing_support::cell_mass(big)))
        CHECK(ratio == doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)).epsilon(1e-3));
    for (double ratio : smoothing_constant_probe(1.0, 2.0, DiffusionSpec{2.0, 1}, ts, Field(g))) CHECK(ratio == 0.0);
}

TEST_CASE("frozen source and phi1") {
    CHECK(phi1(0.0) == 1.0);
    CHECK(phi1(1e-12) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(phi1(2.0) == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-15));
    const GridSpec g = make_grid(1, 64, 4.0);
    const SemigroupPropagator prop(g, DiffusionSpec{2.0, 1});
    const Field a(g, std::vector<double>(g.size(), 1.0));
    const Field b(g, std::vector<double>(g.size(), 0.25));
    const Field out = prop.propagate_with_source(a, b, 2.0);
    for (double v : out.values()) CHECK(v == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("boundary diagnostics") {
    const GridSpec g = make_grid(1, 256, 16.0);
    CHECK(boundary_mass_fraction(testing_support::cell_mass(g)) == 0.0);
    Field edge(g);
    edge[0] = 1.0;
    edge[128] = 1.0;
    CHECK(boundary_mass_fraction(edge) == doctest::Approx(0.5));
    CHECK(kernel_tail_mass(g, DiffusionSpec{2.0, 1}, 0.1) < 1e-12);
    CHECK(kernel_tail_mass(g, DiffusionSpec{1.0, 1}, 1.0) > 1e-3);
}

TEST_CASE("L1 decay of mean-zero data") {
    const GridSpec g = make_grid(1, 1024, 32.0);
    for (double theta : {2.0, 1.0}) {
        const DiffusionSpec d{theta, 1};
        const Field f = sample_field(g, [](std::span<const double> x) {
            return std::exp(-(x[0] - 1.0) * (x[0] - 1.0)) - std::exp(-(x[0] + 1.0) * (x[0] + 1.0));
        });
        CHECK(std::abs(f.integral()) < 1e-14);
        double prev = lp_norm(f, 1.0);
        const double start = prev;
        for (double t : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
            const double cur = lp_norm(apply_semigroup(f, t, d), 1.0);
            CHECK(cur < prev);
            prev = cur;
        }
        CHECK(prev < 0.5 * start);
    }
}

}
