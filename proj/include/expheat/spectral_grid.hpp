#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace expheat {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Periodic box [-L, L)^n sampled with N points per axis.
struct GridSpec {
    int dimension = 1;
    int points_per_axis = 16;
    double half_width = 1.0;

    double spacing() const { return 2.0 * half_width / points_per_axis; }
    double cell_volume() const;
    double box_volume() const;
    std::size_t size() const;
    double coordinate(int index) const { return -half_width + index * spacing(); }
    /// Index of the sample at x = 0 along each axis.
    int center_index() const { return points_per_axis / 2; }
    /// Per-axis indices of a flat row-major offset (unused axes are 0).
    std::array<int, 3> unravel(std::size_t flat) const;
    std::size_t ravel(const std::array<int, 3>& idx) const;

    bool operator==(const GridSpec&) const = default;
};

/// Grid allocation cap in bytes; EXPHEAT_MEM_BUDGET_MB overrides the 2048 MB default.
std::size_t memory_budget_bytes();

GridSpec make_grid(int n, int N, double L);

/// Real samples of a function on a GridSpec, row-major over axes.
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& grid);
    Field(const GridSpec& grid, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool all_finite() const;
    double max_abs() const;
    double min() const;
    /// Grid quadrature of the samples, sum(values) * h^n.
    double integral() const;

    Field scaled(double c) const;

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Fourier coefficients of a Field. The forward transform carries 1/N^n, so a
/// constant field c has coefficient c at xi = 0.
struct SpectralField {
    GridSpec grid;
    std::vector<std::complex<double>> coeffs;
};

/// Signed wavenumber of FFT index j on an axis with N points, in [-N/2, N/2).
inline int wavenumber(int j, int N) { return j < N / 2 ? j : j - N; }

/// |xi| for every flat spectral index, xi_k = pi k / L per axis.
std::vector<double> frequency_magnitudes(const GridSpec& grid);

SpectralField forward_transform(const Field& f);
Field inverse_transform(const SpectralField& F);

/// Discrete L^q norm; q = kInf gives the max over samples.
double lp_norm(const Field& f, double q);

/// Samples fn(x) at every grid point; x has `dimension` entries.
Field sample_field(const GridSpec& grid, const std::function<double(std::span<const double>)>& fn);

/// Euclidean distance from the grid point at `flat` to `center`.
double distance_to(const GridSpec& grid, std::size_t flat, std::span<const double> center);

} // namespace expheat
