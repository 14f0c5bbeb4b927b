#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>

#include "expheat/errors.hpp"
#include "expheat/spectral_grid.hpp"
#include "helpers.hpp"

using namespace expheat;

TEST_SUITE("spectral_grid") {

TEST_CASE("make_grid spacing and sizes") {
    const GridSpec g1 = make_grid(1, 16, 8.0);
    CHECK(g1.spacing() == 1.0);
    const GridSpec g2 = make_grid(2, 64, 32.0);
    CHECK(g2.size() == 4096);
    CHECK(g2.spacing() == 1.0);
    CHECK_THROWS_AS(make_grid(1, 10, 8.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(4, 16, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 16, -1.0), std::invalid_argument);
}

TEST_CASE("memory budget from the environment") {
    ::setenv("EXPHEAT_MEM_BUDGET_MB", "1", 1);
    CHECK_THROWS_AS(make_grid(3, 128, 1.0), std::invalid_argument);
    CHECK_NOTHROW(make_grid(1, 1024, 1.0));
    ::unsetenv("EXPHEAT_MEM_BUDGET_MB");
    CHECK(memory_budget_bytes() == std::size_t{2048} * 1024 * 1024);
}

TEST_CASE("constant field has only a DC coefficient") {
    const GridSpec g = make_grid(2, 16, 3.0);
    const Field f(g, std::vector<double>(g.size(), 2.5));
    const SpectralField F = forward_transform(f);
    CHECK(std::abs(F.coeffs[0] - std::complex<double>(2.5, 0.0)) < 1e-14);
    for (std::size_t i = 1; i < F.coeffs.size(); ++i) CHECK(std::abs(F.coeffs[i]) < 1e-14);
}

TEST_CASE("single cosine mode") {
    const GridSpec g = make_grid(1, 32, 4.0);
    const Field f = sample_field(g, [&](std::span<const double> x) { return std::cos(std::numbers::pi * x[0] / 4.0); });
    const SpectralField F = forward_transform(f);
    // Index 1 and N-1 carry xi = +-pi/L.
    CHECK(std::abs(F.coeffs[1]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(F.coeffs[31]) == doctest::Approx(0.5).epsilon(1e-12));
    for (int k = 2; k < 31; ++k) CHECK(std::abs(F.coeffs[k]) < 1e-13);
    CHECK(std::abs(F.coeffs[0]) < 1e-13);
}

TEST_CASE("Parseval and coefficients against a direct DFT on N = 16") {
    std::mt19937_64 rng(11);
    const GridSpec g = make_grid(1, 16, 2.5);
    const Field f = testing_support::noise(g, rng, -1.0, 1.0);
    const SpectralField F = forward_transform(f);
    const int N = 16;
    double lhs = 0.0, rhs = 0.0;
    for (int k = 0; k < N; ++k) {
        std::complex<double> direct = 0.0;
        for (int j = 0; j < N; ++j) direct += f[j] * std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * k * j / N));
        direct /= N;
        CHECK(std::abs(direct - F.coeffs[k]) < 1e-14);
        rhs += std::norm(direct) * 2.0 * g.half_width;
    }
    for (double v : f.values()) lhs += v * v * g.spacing();
    CHECK(std::abs(lhs - rhs) / lhs < 1e-10);
}

TEST_CASE("round trip is the identity") {
    std::mt19937_64 rng(3);
    for (int n : {1, 2, 3}) {
        const GridSpec g = make_grid(n, n == 3 ? 16 : 64, 5.0);
        const Field f = testing_support::noise(g, rng, -2.0, 3.0);
        const Field back = inverse_transform(forward_transform(f));
        double err = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(back[i] - f[i]));
        CHECK(err / f.max_abs() < 1e-12);
    }
}

TEST_CASE("zero spectrum and Hermitian violation") {
    const GridSpec g = make_grid(1, 16, 1.0);
    SpectralField zero{g, std::vector<std::complex<double>>(16)};
    CHECK(inverse_transform(zero).max_abs() == 0.0);
    SpectralField bad{g, std::vector<std::complex<double>>(16)};
    bad.coeffs[1] = {0.0, 1.0};
    CHECK_THROWS_AS(inverse_transform(bad), CorruptSpectrum);
}

TEST_CASE("lp_norm closed forms") {
    const GridSpec g = make_grid(1, 64, 4.0);
    Field cell(g);
    cell[10] = 3.0;
    for (double q : {1.0, 2.0, 3.5})
        CHECK(lp_norm(cell, q) == doctest::Approx(3.0 * std::pow(g.spacing(), 1.0 / q)).epsilon(1e-14));
    CHECK(lp_norm(cell, kInf) == 3.0);
    const GridSpec g2 = make_grid(2, 32, 1.5);
    const Field c(g2, std::vector<double>(g2.size(), -0.4));
    CHECK(lp_norm(c, 3.0) == doctest::Approx(0.4 * std::pow(3.0, 2.0 / 3.0)).epsilon(1e-13));
    const GridSpec gg = make_grid(1, 1024, 16.0);
    const Field gauss = sample_field(gg, [](std::span<const double> x) { return std::exp(-x[0] * x[0]); });
    CHECK(std::abs(lp_norm(gauss, 2.0) - std::pow(std::numbers::pi / 2.0, 0.25)) < 1e-6);
    CHECK_THROWS_AS(lp_norm(gauss, 0.5), std::invalid_argument);
}

TEST_CASE("field helpers") {
    const GridSpec g = make_grid(3, 16, 2.0);
    for (std::size_t flat : {std::size_t{0}, std::size_t{123}, g.size() - 1}) CHECK(g.ravel(g.unravel(flat)) == flat);
    CHECK(g.coordinate(g.center_index()) == 0.0);
    Field f(g);
    f[5] = -2.0;
    CHECK(f.min() == -2.0);
    CHECK(f.max_abs() == 2.0);
    CHECK(f.integral() == doctest::Approx(-2.0 * g.cell_volume()));
}

}
