#include <doctest.h>

#include <cmath>

#include "expheat/nonlinearity.hpp"
#include "expheat/orlicz.hpp"
#include "helpers.hpp"

using namespace expheat;

TEST_SUITE("nonlinearity") {

TEST_CASE("pointwise values") {
    const GridSpec g = make_grid(1, 16, 1.0);
    const NonlinearitySpec s{2.0, 2.0, 1};
    CHECK(evaluate(Field(g), s).value.max_abs() == 0.0);
    Field u(g);
    u[3] = 1.0;
    const auto res = evaluate(u, s);
    CHECK(res.value[3] == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK_FALSE(res.overflow);
    // n = 4: |c|^{1} c e^{c^2}.
    const NonlinearitySpec s4{2.0, 2.0, 4};
    CHECK(nonlinearity_value(0.1, s4) == doctest::Approx(0.01 * std::exp(0.01)).epsilon(1e-15));
    CHECK(nonlinearity_value(0.1, s4) == doctest::Approx(0.0101005016708417).epsilon(1e-13));
}

TEST_CASE("derivative against finite differences") {
    const NonlinearitySpec s{2.0, 1.0, 1};
    for (double u : {0.1, 0.5, 1.2}) {
        const double h = 1e-6;
        const double fd = (nonlinearity_value(u + h, s) - nonlinearity_value(u - h, s)) / (2 * h);
        CHECK(nonlinearity_derivative(u, s) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("signed mode and clamping") {
    CHECK(admits_signed_mode(2.0));
    CHECK(admits_signed_mode(4.0));
    CHECK_FALSE(admits_signed_mode(3.0));
    CHECK_FALSE(admits_signed_mode(2.5));
    NonlinearitySpec odd{3.0, 2.0, 1};
    odd.signed_mode = true;
    CHECK_THROWS_AS(odd.validate(), std::invalid_argument);
    NonlinearitySpec even{2.0, 2.0, 1};
    even.signed_mode = true;
    CHECK(nonlinearity_value(-0.5, even) == doctest::Approx(-nonlinearity_value(0.5, even)));

    const GridSpec g = make_grid(1, 16, 1.0);
    Field u(g, std::vector<double>(16, 1.0));
    u[2] = -1e-14;
    const auto res = evaluate(u, NonlinearitySpec{2.0, 2.0, 1});
    CHECK(res.max_clamp == doctest::Approx(1e-14));
    CHECK(res.value[2] == 0.0);
    u[2] = -0.1;
    CHECK_THROWS_AS(evaluate(u, NonlinearitySpec{2.0, 2.0, 1}), std::domain_error);
}

TEST_CASE("overflow is flagged") {
    const GridSpec g = make_grid(1, 16, 1.0);
    Field u(g);
    u[0] = 30.0;
    const auto res = evaluate(u, NonlinearitySpec{2.0, 2.0, 1});
    CHECK(res.overflow);
    CHECK(std::isfinite(res.value[0]));
}

TEST_CASE("series exponents and trivial majorant") {
    const auto ell = series_exponents(NonlinearitySpec{2.0, 2.0, 4}, 2);
    CHECK(ell[0] == doctest::Approx(2.0));
    CHECK(ell[1] == doctest::Approx(4.0));
    CHECK(series_majorant(0.0, 2.0, NonlinearitySpec{2.0, 2.0, 1}).value == 0.0);
    CHECK(majorant_min_exponent(NonlinearitySpec{2.0, 2.0, 1}) == 1.0);
    CHECK(majorant_min_exponent(NonlinearitySpec{2.0, 2.0, 8}) == doctest::Approx(16.0 / 12.0));
    const auto div = series_majorant(1.0, 2.0, NonlinearitySpec{2.0, 2.0, 1});
    CHECK_FALSE(div.converged);
    CHECK(div.value == kInf);
}

TEST_CASE("majorant bounds ||f(u)||_2 on random fields") {
    std::mt19937_64 rng(41);
    const NonlinearitySpec s{2.0, 2.0, 1};
    const GridSpec g = make_grid(1, 512, 16.0);
    const auto maj = series_majorant(0.1, 2.0, s);
    CHECK(maj.converged);
    CHECK(std::isfinite(maj.value));
    for (int k = 0; k < 50; ++k) {
        Field u = testing_support::random_bumps(g, rng, true);
        u = u.scaled(0.1 / luxemburg_norm(u) * (0.2 + 0.8 * (k + 1) / 50.0));
        CHECK(luxemburg_norm(u) <= 0.1 + 1e-12);
        CHECK(lp_norm(evaluate(u, s).value, 2.0) <= maj.value);
    }
}

TEST_CASE("Lipschitz majorant") {
    CHECK(lipschitz_majorant(0.3, 0.3, 1.2, 5.0) == 0.0);
    CHECK(lipschitz_majorant(0.5, 0.0, 1.2, 2.0) == doctest::Approx(2.0 * 0.5 * (std::exp(0.25 * 1.2) + 1.0)));
    NonlinearitySpec s{2.0, 2.0, 1};
    s.signed_mode = true;
    const auto cal = calibrate_lipschitz(s, 1.5, 2.0, 81);
    CHECK(cal.lambda_coef <= 1.5);
    CHECK(std::isfinite(cal.C_coef));
    CHECK(cal.C_coef > 0.0);
    // Calibrated C is feasible on an independent off-grid check.
    for (double a : {-1.93, -0.71, 0.37, 1.58})
        for (double b : {-1.41, 0.05, 1.99})
            CHECK(std::abs(nonlinearity_value(a, s) - nonlinearity_value(b, s)) <=
                  lipschitz_majorant(a, b, cal.lambda_coef, cal.C_coef) * (1 + 1e-9) + 1e-12);
}

}
