#pragma once

#include <span>
#include <vector>

#include "expheat/spectral_grid.hpp"

namespace expheat {

/// Order of the fractional Laplacian (-Delta)^{theta/2}.
struct DiffusionSpec {
    double theta = 2.0;
    int dimension = 1;

    void validate() const;
    bool operator==(const DiffusionSpec&) const = default;
};

/// Fourier-multiplier form of e^{-t L_theta} on one grid. Caches the symbol
/// |xi|^theta; the symbol at xi = 0 is exactly 0 for every theta.
class SemigroupPropagator {
public:
    SemigroupPropagator(const GridSpec& grid, const DiffusionSpec& diffusion);

    const GridSpec& grid() const { return grid_; }
    const DiffusionSpec& diffusion() const { return diffusion_; }
    std::span<const double> symbol() const { return symbol_; }

    Field propagate(const Field& f, double t) const;

    /// e^{-tL} a + int_0^t e^{-(t-s)L} b ds for a source b frozen in time.
    Field propagate_with_source(const Field& a, const Field& b, double t) const;

    /// Spectral-domain versions used by the integrators; buffers are modified in place.
    void multiply_semigroup(std::vector<std::complex<double>>& coeffs, double t) const;

private:
    GridSpec grid_;
    DiffusionSpec diffusion_;
    std::vector<double> symbol_;
};

/// phi_1(z) = (1 - e^{-z}) / z with phi_1(0) = 1.
double phi1(double z);

Field apply_semigroup(const Field& f, double t, const DiffusionSpec& d);

/// Heat kernel G_2(t, x) = (4 pi t)^{-n/2} exp(-|x|^2 / 4t), n = x.size().
double gaussian_kernel(double t, std::span<const double> x);

/// G_2(t, .) sampled on the grid (not periodized).
Field gaussian_kernel_field(const GridSpec& grid, double t);

/// G_theta(t, .) on the grid: closed form for theta = 2, otherwise the
/// periodized kernel synthesized from its Fourier multiplier.
Field diffusion_kernel_field(const GridSpec& grid, const DiffusionSpec& d, double t);

/// Relative max-norm gap between e^{-tL}f and e^{-(t-s)L}e^{-sL}f.
double verify_semigroup_property(const Field& f, double s, double t, const DiffusionSpec& d);

/// Ratios ||e^{-tL}f||_rho / (t^{-(n/theta)(1/q - 1/rho)} ||f||_q) for each t.
std::vector<double> smoothing_constant_probe(double q, double rho, const DiffusionSpec& d,
                                             std::span<const double> t_list, const Field& f);

/// Fraction of sum|f| carried by samples with some |x_a| > L/2.
double boundary_mass_fraction(const Field& f);

/// Boundary-mass fraction of the kernel itself at time t; used to size L,
/// which matters most for the polynomial tails of theta < 2.
double kernel_tail_mass(const GridSpec& grid, const DiffusionSpec& d, double t);

} // namespace expheat
