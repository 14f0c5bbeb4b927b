#include <doctest.h>

#include <cmath>

#include "expheat/initial_data.hpp"
#include "expheat/orlicz.hpp"
#include "helpers.hpp"

using namespace expheat;

TEST_SUITE("orlicz") {

TEST_CASE("orlicz_integral basics") {
    const GridSpec g = make_grid(1, 64, 4.0);
    CHECK(orlicz_integral(Field(g), 0.3, 2.0) == 0.0);
    Field cell(g);
    const double a = 1.3;
    cell[20] = a;
    const double V = g.cell_volume();
    const double lambda = a / std::sqrt(std::log(1.0 + 1.0 / V));
    CHECK(orlicz_integral(cell, lambda, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = kInf;
    for (double lam : {0.5, 1.0, 2.0, 4.0, 100.0, 1e6}) {
        const double v = orlicz_integral(cell, lam, 2.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-11);
    CHECK(orlicz_integral(cell, 1e-3, 2.0) == kInf);
}

TEST_CASE("single-cell Luxemburg norm") {
    for (int n : {1, 2, 3}) {
        const GridSpec g = make_grid(n, 16, 1.7);
        for (double r : {1.5, 2.0, 3.0}) {
            Field cell(g);
            cell[7] = 0.9;
            const double exact = 0.9 / std::pow(std::log(1.0 + 1.0 / g.cell_volume()), 1.0 / r);
            CHECK(luxemburg_norm(cell, OrliczParams{r}) == doctest::Approx(exact).epsilon(1e-8));
        }
    }
    CHECK(luxemburg_norm(Field(make_grid(1, 16, 1.0))) == 0.0);
}

TEST_CASE("norm of the logarithmic spike is resolution stable") {
    DataRecipe spike;
    spike.kind = DataKind::log_spike;
    spike.width = 1.0;
    spike.r = 2.0;
    const double coarse = luxemburg_norm(generate(spike, make_grid(1, 1024, 4.0)), OrliczParams{2.0});
    const double fine = luxemburg_norm(generate(spike, make_grid(1, 2048, 4.0)), OrliczParams{2.0});
    CHECK(std::isfinite(coarse));
    CHECK(std::abs(fine - coarse) / coarse < 0.02);
}

TEST_CASE("norm properties on random fields") {
    std::mt19937_64 rng(31);
    const GridSpec g = make_grid(1, 256, 8.0);
    for (int k = 0; k < 20; ++k) {
        const Field f = testing_support::random_bumps(g, rng, false);
        const double n0 = luxemburg_norm(f);
        CHECK(orlicz_integral(f, n0, 2.0) <= 1.0);
        CHECK(orlicz_integral(f, n0 * (1 - 1e-8), 2.0) > 1.0 - 1e-6);
        CHECK(luxemburg_norm(f.scaled(-2.5)) == doctest::Approx(2.5 * n0).epsilon(1e-8));
        for (double p : {2.0, 4.0, 8.0}) CHECK(lp_norm(f, p) <= embedding_constant(p, 2.0) * n0);
    }
}

TEST_CASE("embedding constants") {
    CHECK(embedding_constant(2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(embedding_constant(4.0, 2.0) == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-15));
    CHECK(embedding_constant(6.0, 2.0) == doctest::Approx(std::pow(6.0, 1.0 / 6.0)).epsilon(1e-15));
    CHECK_THROWS_AS(embedding_constant(1.0, 2.0), std::invalid_argument);
}

TEST_CASE("Stirling ratio") {
    CHECK(stirling_bound_ratio(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(stirling_bound_ratio(1.0, 2.0) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    const double s100 = stirling_bound_sup(1.0, 10.0, 1.0, 50.0, 100, 100);
    const double s200 = stirling_bound_sup(1.0, 10.0, 1.0, 50.0, 200, 200);
    CHECK(std::isfinite(s100));
    CHECK(std::abs(s200 - s100) / s100 < 0.01);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(OrliczParams{1.0}.validate(), std::invalid_argument);
    OrliczParams p;
    p.tol = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

}
