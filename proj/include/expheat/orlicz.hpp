#pragma once

#include "expheat/spectral_grid.hpp"

namespace expheat {

/// Parameters of the exp L^r Luxemburg-norm root finder.
struct OrliczParams {
    double r = 2.0;
    double bracket_hi_factor = 4.0;
    double tol = 1e-10;

    void validate() const;
    bool operator==(const OrliczParams&) const = default;
};

/// Arguments (|u|/lambda)^r above this overflow e^x in double precision.
inline constexpr double kExpArgumentCeiling = 700.0;

/// Grid quadrature of exp((|f|/lambda)^r) - 1. Returns +inf when any
/// exponent argument exceeds kExpArgumentCeiling.
double orlicz_integral(const Field& f, double lambda, double r);

/// inf{lambda > 0 : orlicz_integral(f, lambda, r) <= 1}, located by
/// bracketing and bisection. Returns 0 for the zero field.
double luxemburg_norm(const Field& f, const OrliczParams& p = {});

/// Gamma(p/r + 1)^{1/p}, the constant of ||psi||_p <= C ||psi||_{exp L^r}, p >= r.
double embedding_constant(double p, double r);

/// Gamma(rr p + 1)^{1/p} / (Gamma(rr + 1) p^rr).
double stirling_bound_ratio(double rr, double p);

/// Largest stirling_bound_ratio over a uniform (rr, p) grid.
double stirling_bound_sup(double rr_lo, double rr_hi, double p_lo, double p_hi, int rr_points, int p_points);

} // namespace expheat
