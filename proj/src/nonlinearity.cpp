#include "expheat/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace expheat {

bool admits_signed_mode(double r) {
    return r == std::floor(r) && std::fmod(r, 2.0) == 0.0;
}

void NonlinearitySpec::validate() const {
    if (!(r > 1.0)) throw std::invalid_argument("NonlinearitySpec: r must exceed 1");
    if (!(theta > 0.0 && theta <= 2.0)) throw std::invalid_argument("NonlinearitySpec: theta must lie in (0, 2]");
    if (dimension < 1) throw std::invalid_argument("NonlinearitySpec: dimension must be positive");
    if (!(series_truncation_tol > 0.0)) throw std::invalid_argument("NonlinearitySpec: series tolerance must be positive");
    if (signed_mode && !admits_signed_mode(r))
        throw std::invalid_argument("NonlinearitySpec: signed_mode requires r to be an even integer");
}

double nonlinearity_value(double u, const NonlinearitySpec& s) {
    if (u == 0.0) return 0.0;
    const double a = std::abs(u);
    return std::pow(a, s.leading_power()) * u * std::exp(std::pow(a, s.r));
}

double nonlinearity_derivative(double u, const NonlinearitySpec& s) {
    const double a = std::abs(u);
    const double P = s.leading_power();
    const double ur = std::pow(a, s.r);
    return std::pow(a, P) * std::exp(ur) * (1.0 + P + s.r * ur);
}

NonlinearityResult evaluate(const Field& u, const NonlinearitySpec& s, double overflow_threshold) {
    s.validate();
    if (s.dimension != u.grid().dimension) throw std::invalid_argument("evaluate: dimension mismatch");
    const double floor = -1e-12 * u.max_abs();
    const double cap = std::pow(overflow_threshold, 1.0 / s.r);

    NonlinearityResult out{Field(u.grid()), false, 0.0};
    auto vals = out.value.values();
    for (std::size_t i = 0; i < u.size(); ++i) {
        double v = u[i];
        if (!s.signed_mode && v < 0.0) {
            if (v < floor) throw std::domain_error("evaluate: negative sample in unsigned mode");
            out.max_clamp = std::max(out.max_clamp, -v);
            v = 0.0;
        }
        if (std::abs(v) > cap || !std::isfinite(v)) {
            out.overflow = true;
            v = std::copysign(cap, v);
        }
        const double fv = nonlinearity_value(v, s);
        vals[i] = std::isfinite(fv) ? fv : std::copysign(std::numeric_limits<double>::max(), v);
    }
    return out;
}

double majorant_min_exponent(const NonlinearitySpec& s) {
    const double n = s.dimension;
    return std::max(s.r * n / (n + s.r * s.theta), 1.0);
}

std::vector<double> series_exponents(const NonlinearitySpec& s, int count) {
    std::vector<double> out(std::max(count, 0));
    for (int k = 0; k < count; ++k) out[k] = s.r * k + 1.0 + s.leading_power();
    return out;
}

SeriesMajorant series_majorant(double M, double p, const NonlinearitySpec& s, int k_max) {
    s.validate();
    if (!(M >= 0.0)) throw std::invalid_argument("series_majorant: M must be nonnegative");
    if (k_max < 1) throw std::invalid_argument("series_majorant: k_max must be >= 1");
    const double p1 = majorant_min_exponent(s);
    if (!(p >= p1 * (1.0 - 1e-12))) throw std::invalid_argument("series_majorant: need p >= p_1");
    if (M == 0.0) return {0.0, 1, true};
    // The term ratio tends to p M^r.
    if (p * std::pow(M, s.r) >= 1.0) return {kInf, 0, false};

    const double logM = std::log(M);
    double sum = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        const double ell = s.r * k + 1.0 + s.leading_power();
        const double log_term = std::lgamma(ell * p / s.r + 1.0) / p + ell * logM - std::lgamma(k + 1.0);
        const double term = std::exp(log_term);
        sum += term;
        const double next_ell = ell + s.r;
        const double next = std::exp(std::lgamma(next_ell * p / s.r + 1.0) / p + next_ell * logM - std::lgamma(k + 2.0));
        // Stop once the tail is negligible and terms are already shrinking.
        if (next < term && next < s.series_truncation_tol * sum) return {sum, k + 1, true};
    }
    return {kInf, k_max + 1, false};
}

double lipschitz_majorant(double a, double b, double lambda_coef, double C_coef) {
    if (!(lambda_coef > 1.0)) throw std::invalid_argument("lipschitz_majorant: lambda must exceed 1");
    if (!(C_coef > 0.0)) throw std::invalid_argument("lipschitz_majorant: C must be positive");
    return C_coef * std::abs(a - b) * (std::exp(lambda_coef * a * a) + std::exp(lambda_coef * b * b));
}

LipschitzCalibration calibrate_lipschitz(const NonlinearitySpec& s, double lambda_coef, double range, int points) {
    s.validate();
    if (!(lambda_coef > 1.0)) throw std::invalid_argument("calibrate_lipschitz: lambda must exceed 1");
    if (!(range > 0.0) || points < 2) throw std::invalid_argument("calibrate_lipschitz: bad scan");
    const double lo = s.signed_mode ? -range : 0.0;
    std::vector<double> grid(points), fv(points), weight(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = lo + (range - lo) * i / (points - 1);
        fv[i] = nonlinearity_value(grid[i], s);
        weight[i] = std::exp(lambda_coef * grid[i] * grid[i]);
    }
    double C = 0.0;
    for (int i = 0; i < points; ++i) {
        C = std::max(C, nonlinearity_derivative(grid[i], s) / (2.0 * weight[i]));
        for (int j = i + 1; j < points; ++j) {
            const double ratio = std::abs(fv[i] - fv[j]) / ((grid[j] - grid[i]) * (weight[i] + weight[j]));
            C = std::max(C, ratio);
        }
    }
    return {lambda_coef, C};
}

} // namespace expheat
