#include "expheat/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "expheat/errors.hpp"

namespace expheat {

void OrliczParams::validate() const {
    if (!(r > 1.0)) throw std::invalid_argument("OrliczParams: r must exceed 1");
    if (!(bracket_hi_factor > 0.0)) throw std::invalid_argument("OrliczParams: bracket_hi_factor must be positive");
    if (!(tol > 0.0 && tol <= 1e-4)) throw std::invalid_argument("OrliczParams: tol must lie in (0, 1e-4]");
}

double orlicz_integral(const Field& f, double lambda, double r) {
    if (!(lambda > 0.0)) throw std::invalid_argument("orlicz_integral: lambda must be positive");
    if (!(r > 1.0)) throw std::invalid_argument("orlicz_integral: r must exceed 1");
    double s = 0.0;
    for (double v : f.values()) {
        if (v == 0.0) continue;
        const double arg = std::pow(std::abs(v) / lambda, r);
        if (arg > kExpArgumentCeiling) return kInf;
        s += std::expm1(arg);
    }
    return s * f.grid().cell_volume();
}

double luxemburg_norm(const Field& f, const OrliczParams& p) {
    p.validate();
    if (!f.all_finite()) throw std::invalid_argument("luxemburg_norm: non-finite samples");
    const double peak = f.max_abs();
    if (peak == 0.0) return 0.0;

    auto excess = [&](double lambda) { return orlicz_integral(f, lambda, p.r) - 1.0; };

    // Below lo the peak sample alone overflows, so the root lies above it.
    double lo = peak / std::pow(kExpArgumentCeiling, 1.0 / p.r);
    if (excess(lo) <= 0.0) return lo;

    double hi = peak * p.bracket_hi_factor;
    int expansions = 0;
    while (excess(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 200) throw BracketFailure("luxemburg_norm: upper bracket expansion failed");
    }

    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 400; ++iter) {
        mid = 0.5 * (lo + hi);
        const double e = excess(mid);
        if (e > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        const bool narrow = (hi - lo) <= p.tol * hi;
        if ((narrow && std::abs(e) <= 10.0 * p.tol) || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
            break;
    }
    // hi always satisfies the defining inequality.
    return excess(mid) <= 0.0 ? mid : hi;
}

double embedding_constant(double p, double r) {
    if (!(r > 1.0)) throw std::invalid_argument("embedding_constant: r must exceed 1");
    if (!(p >= r)) throw std::invalid_argument("embedding_constant: need p >= r");
    return std::exp(std::lgamma(p / r + 1.0) / p);
}

double stirling_bound_ratio(double rr, double p) {
    if (!(rr >= 1.0) || !(p >= 1.0)) throw std::invalid_argument("stirling_bound_ratio: need rr >= 1 and p >= 1");
    return std::exp(std::lgamma(rr * p + 1.0) / p - std::lgamma(rr + 1.0) - rr * std::log(p));
}

double stirling_bound_sup(double rr_lo, double rr_hi, double p_lo, double p_hi, int rr_points, int p_points) {
    if (rr_points < 2 || p_points < 2) throw std::invalid_argument("stirling_bound_sup: need at least 2 points per axis");
    double best = 0.0;
    for (int i = 0; i < rr_points; ++i) {
        const double rr = rr_lo + (rr_hi - rr_lo) * i / (rr_points - 1);
        for (int j = 0; j < p_points; ++j) {
            const double p = p_lo + (p_hi - p_lo) * j / (p_points - 1);
            best = std::max(best, stirling_bound_ratio(rr, p));
        }
    }
    return best;
}

} // namespace expheat
