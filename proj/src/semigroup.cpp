#include "expheat/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft_engine.hpp"

namespace expheat {

void DiffusionSpec::validate() const {
    if (!(theta > 0.0 && theta <= 2.0)) throw std::invalid_argument("DiffusionSpec: theta must lie in (0, 2]");
    if (dimension < 1 || dimension > 3) throw std::invalid_argument("DiffusionSpec: dimension must be 1, 2 or 3");
}

double phi1(double z) {
    if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
    return -std::expm1(-z) / z;
}

SemigroupPropagator::SemigroupPropagator(const GridSpec& grid, const DiffusionSpec& diffusion)
    : grid_(grid), diffusion_(diffusion) {
    diffusion_.validate();
    if (diffusion_.dimension != grid_.dimension)
        throw std::invalid_argument("SemigroupPropagator: grid and diffusion dimensions differ");
    symbol_ = frequency_magnitudes(grid_);
    for (double& s : symbol_) s = s == 0.0 ? 0.0 : std::pow(s, diffusion_.theta);
}

void SemigroupPropagator::multiply_semigroup(std::vector<std::complex<double>>& coeffs, double t) const {
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= std::exp(-t * symbol_[i]);
}

Field SemigroupPropagator::propagate(const Field& f, double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: t must be nonnegative");
    if (!(f.grid() == grid_)) throw std::invalid_argument("apply_semigroup: grid mismatch");
    if (t == 0.0) return f;
    auto spec = forward_transform(f);
    multiply_semigroup(spec.coeffs, t);
    return inverse_transform(spec);
}

Field SemigroupPropagator::propagate_with_source(const Field& a, const Field& b, double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("propagate_with_source: t must be nonnegative");
    if (t == 0.0) return a;
    auto sa = forward_transform(a);
    const auto sb = forward_transform(b);
    for (std::size_t i = 0; i < sa.coeffs.size(); ++i) {
        const double z = t * symbol_[i];
        sa.coeffs[i] = sa.coeffs[i] * std::exp(-z) + sb.coeffs[i] * (t * phi1(z));
    }
    return inverse_transform(sa);
}

Field apply_semigroup(const Field& f, double t, const DiffusionSpec& d) {
    if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: t must be nonnegative");
    if (t == 0.0) return f;
    return SemigroupPropagator(f.grid(), d).propagate(f, t);
}

double gaussian_kernel(double t, std::span<const double> x) {
    if (!(t > 0.0)) throw std::invalid_argument("gaussian_kernel: t must be positive");
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double n = static_cast<double>(x.size());
    return std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-r2 / (4.0 * t));
}

Field gaussian_kernel_field(const GridSpec& grid, double t) {
    return sample_field(grid, [t](std::span<const double> x) { return gaussian_kernel(t, x); });
}

Field diffusion_kernel_field(const GridSpec& grid, const DiffusionSpec& d, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("diffusion_kernel_field: t must be positive");
    if (d.theta == 2.0) return gaussian_kernel_field(grid, t);
    // Periodized kernel: sum_k e^{-t|xi_k|^theta} e^{i xi_k x} / (2L)^n.
    const SemigroupPropagator prop(grid, d);
    SpectralField spec{grid, std::vector<std::complex<double>>(grid.size())};
    const double inv_vol = 1.0 / grid.box_volume();
    const auto sym = prop.symbol();
    const int N = grid.points_per_axis;
    for (std::size_t flat = 0; flat < spec.coeffs.size(); ++flat) {
        // Phase shift so that the kernel is centred at x = 0 rather than at x_0 = -L.
        const auto idx = grid.unravel(flat);
        int ksum = 0;
        for (int a = 0; a < grid.dimension; ++a) ksum += wavenumber(idx[a], N);
        const double sign = (ksum % 2 == 0) ? 1.0 : -1.0;
        spec.coeffs[flat] = sign * std::exp(-t * sym[flat]) * inv_vol;
    }
    return inverse_transform(spec);
}

double verify_semigroup_property(const Field& f, double s, double t, const DiffusionSpec& d) {
    if (!(s > 0.0 && s <= t)) throw std::invalid_argument("verify_semigroup_property: need 0 < s <= t");
    const SemigroupPropagator prop(f.grid(), d);
    const Field direct = prop.propagate(f, t);
    const Field composed = prop.propagate(prop.propagate(f, s), t - s);
    double gap = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i) gap = std::max(gap, std::abs(direct[i] - composed[i]));
    const double scale = direct.max_abs();
    return scale == 0.0 ? gap : gap / scale;
}

std::vector<double> smoothing_constant_probe(double q, double rho, const DiffusionSpec& d,
                                             std::span<const double> t_list, const Field& f) {
    if (!(q >= 1.0) || !(rho >= 1.0)) throw std::invalid_argument("smoothing_constant_probe: exponents must be >= 1");
    if (q > rho) throw std::invalid_argument("smoothing_constant_probe: need q <= rho");
    const SemigroupPropagator prop(f.grid(), d);
    const double norm_q = lp_norm(f, q);
    const double inv_rho = rho == kInf ? 0.0 : 1.0 / rho;
    const double power = (f.grid().dimension / d.theta) * (1.0 / q - inv_rho);
    std::vector<double> ratios;
    ratios.reserve(t_list.size());
    for (double t : t_list) {
        if (!(t > 0.0)) throw std::invalid_argument("smoothing_constant_probe: times must be positive");
        if (norm_q == 0.0) {
            ratios.push_back(0.0);
            continue;
        }
        ratios.push_back(lp_norm(prop.propagate(f, t), rho) / (std::pow(t, -power) * norm_q));
    }
    return ratios;
}

double boundary_mass_fraction(const Field& f) {
    const GridSpec& g = f.grid();
    const double inner = 0.5 * g.half_width;
    double total = 0.0;
    double outer = 0.0;
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        const double v = std::abs(f[flat]);
        total += v;
        const auto idx = g.unravel(flat);
        for (int a = 0; a < g.dimension; ++a) {
            if (std::abs(g.coordinate(idx[a])) > inner) {
                outer += v;
                break;
            }
        }
    }
    return total == 0.0 ? 0.0 : outer / total;
}

double kernel_tail_mass(const GridSpec& grid, const DiffusionSpec& d, double t) {
    return boundary_mass_fraction(diffusion_kernel_field(grid, d, t));
}

} // namespace expheat
