#pragma once

#include <vector>

#include "expheat/spectral_grid.hpp"

namespace expheat {

/// f(u) = |u|^{r theta / n} u e^{u^r}. With r = theta = 2 this is
/// |u|^{4/n} u e^{u^2}.
struct NonlinearitySpec {
    double r = 2.0;
    double theta = 2.0;
    int dimension = 1;
    double series_truncation_tol = 1e-14;
    /// Only meaningful when u^r is defined for signed u (r an even integer).
    bool signed_mode = false;

    /// r theta / n, the power of |u| in front of u e^{u^r}.
    double leading_power() const { return r * theta / dimension; }
    void validate() const;
    bool operator==(const NonlinearitySpec&) const = default;
};

/// True when r is an even integer.
bool admits_signed_mode(double r);

/// f(u) for one sample. Negative u in unsigned mode must be clamped by the caller.
double nonlinearity_value(double u, const NonlinearitySpec& s);

/// f'(u) for one sample, u >= 0 in unsigned mode.
double nonlinearity_derivative(double u, const NonlinearitySpec& s);

struct NonlinearityResult {
    Field value;
    /// Some sample had |u|^r above the overflow threshold (treated as blowup).
    bool overflow = false;
    /// Largest negative excursion set to zero in unsigned mode.
    double max_clamp = 0.0;
};

/// Pointwise f(u). In unsigned mode negative samples down to
/// -1e-12 ||u||_inf are clamped to 0; deeper negatives are rejected.
/// Overflowing samples are capped at the threshold value and flagged.
NonlinearityResult evaluate(const Field& u, const NonlinearitySpec& s, double overflow_threshold = 700.0);

/// p_1 = max{r n / (n + r theta), 1}: smallest admissible p of the majorant.
double majorant_min_exponent(const NonlinearitySpec& s);

/// l_k = r k + 1 + r theta / n for k = 0 .. count-1.
std::vector<double> series_exponents(const NonlinearitySpec& s, int count);

struct SeriesMajorant {
    double value = 0.0;
    int terms = 0;
    bool converged = false;
};

/// sum_k (Gamma(l_k p / r + 1)^{1/(l_k p)} M)^{l_k} / k!, an upper bound for
/// ||f(u)||_p whenever ||u||_{exp L^r} <= M. Converges only for p M^r < 1;
/// otherwise converged = false and value = +inf.
SeriesMajorant series_majorant(double M, double p, const NonlinearitySpec& s, int k_max = 100000);

/// C |a - b| (e^{lambda a^2} + e^{lambda b^2}).
double lipschitz_majorant(double a, double b, double lambda_coef, double C_coef);

struct LipschitzCalibration {
    double lambda_coef = 0.0;
    double C_coef = 0.0;
};

/// Smallest C for which |f(a) - f(b)| <= lipschitz_majorant(a, b, lambda, C)
/// on a uniform points x points scan of [-range, range]^2 (diagonal pairs use f').
LipschitzCalibration calibrate_lipschitz(const NonlinearitySpec& s, double lambda_coef, double range, int points);

} // namespace expheat
