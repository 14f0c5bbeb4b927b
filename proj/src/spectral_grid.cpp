#include "expheat/spectral_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

#include "expheat/errors.hpp"
#include "fft_engine.hpp"

namespace expheat {

namespace {

// Bytes held per sample by a field plus one complex work buffer.
constexpr std::size_t kBytesPerSample = sizeof(double) + sizeof(std::complex<double>);

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

} // namespace

double GridSpec::cell_volume() const { return std::pow(spacing(), dimension); }

double GridSpec::box_volume() const { return std::pow(2.0 * half_width, dimension); }

std::size_t GridSpec::size() const {
    std::size_t count = 1;
    for (int a = 0; a < dimension; ++a) count *= static_cast<std::size_t>(points_per_axis);
    return count;
}

std::array<int, 3> GridSpec::unravel(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    const auto N = static_cast<std::size_t>(points_per_axis);
    for (int a = dimension - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % N);
        flat /= N;
    }
    return idx;
}

std::size_t GridSpec::ravel(const std::array<int, 3>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dimension; ++a) flat = flat * points_per_axis + idx[a];
    return flat;
}

std::size_t memory_budget_bytes() {
    std::size_t mb = 2048;
    if (const char* env = std::getenv("EXPHEAT_MEM_BUDGET_MB"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) mb = static_cast<std::size_t>(v);
    }
    return mb * 1024 * 1024;
}

GridSpec make_grid(int n, int N, double L) {
    if (n < 1 || n > 3) throw std::invalid_argument("make_grid: dimension must be 1, 2 or 3");
    if (!is_power_of_two(N) || N < 16)
        throw std::invalid_argument("make_grid: N must be a power of two >= 16, got " + std::to_string(N));
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("make_grid: L must be positive");

    GridSpec grid{n, N, L};
    const double samples = std::pow(static_cast<double>(N), n);
    if (samples * kBytesPerSample > static_cast<double>(memory_budget_bytes()))
        throw std::invalid_argument("make_grid: N^n = " + std::to_string(static_cast<long long>(samples)) +
                                    " samples exceeds the memory budget (EXPHEAT_MEM_BUDGET_MB)");
    return grid;
}

Field::Field(const GridSpec& grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("Field: expected " + std::to_string(grid_.size()) + " samples, got " +
                                    std::to_string(values_.size()));
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::min() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double Field::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.cell_volume();
}

Field Field::scaled(double c) const {
    std::vector<double> out(values_);
    for (double& v : out) v *= c;
    return Field(grid_, std::move(out));
}

std::vector<double> frequency_magnitudes(const GridSpec& grid) {
    const int N = grid.points_per_axis;
    const double dk = std::numbers::pi / grid.half_width;
    std::vector<double> axis_sq(N);
    for (int j = 0; j < N; ++j) {
        const double xi = dk * wavenumber(j, N);
        axis_sq[j] = xi * xi;
    }
    std::vector<double> out(grid.size());
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        const auto idx = grid.unravel(flat);
        double s = 0.0;
        for (int a = 0; a < grid.dimension; ++a) s += axis_sq[idx[a]];
        out[flat] = std::sqrt(s);
    }
    return out;
}

SpectralField forward_transform(const Field& f) {
    if (!f.all_finite()) throw std::invalid_argument("forward_transform: non-finite samples");
    SpectralField out{f.grid(), std::vector<std::complex<double>>(f.size())};
    std::copy(f.values().begin(), f.values().end(), out.coeffs.begin());
    detail::fft_inplace(out.coeffs, f.grid(), -1);
    const double norm = 1.0 / static_cast<double>(f.size());
    for (auto& c : out.coeffs) c *= norm;
    return out;
}

Field inverse_transform(const SpectralField& F) {
    if (F.coeffs.size() != F.grid.size()) throw std::invalid_argument("inverse_transform: malformed spectrum");
    std::vector<std::complex<double>> work(F.coeffs);
    detail::fft_inplace(work, F.grid, +1);

    double max_re = 0.0;
    double max_im = 0.0;
    std::vector<double> values(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) {
        values[i] = work[i].real();
        max_re = std::max(max_re, std::abs(work[i].real()));
        max_im = std::max(max_im, std::abs(work[i].imag()));
    }
    if (max_im > 1e-10 * std::max(1.0, max_re))
        throw CorruptSpectrum("inverse_transform: imaginary residue " + std::to_string(max_im) +
                              " exceeds tolerance (spectrum is not Hermitian)");
    return Field(F.grid, std::move(values));
}

double lp_norm(const Field& f, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("lp_norm: q must be >= 1");
    const double peak = f.max_abs();
    if (q == kInf || peak == 0.0) return peak;
    // Scaled by the peak so large q cannot overflow.
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v) / peak, q);
    return peak * std::pow(s * f.grid().cell_volume(), 1.0 / q);
}

Field sample_field(const GridSpec& grid, const std::function<double(std::span<const double>)>& fn) {
    std::vector<double> values(grid.size());
    std::array<double, 3> x{};
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        const auto idx = grid.unravel(flat);
        for (int a = 0; a < grid.dimension; ++a) x[a] = grid.coordinate(idx[a]);
        values[flat] = fn(std::span<const double>(x.data(), grid.dimension));
    }
    return Field(grid, std::move(values));
}

double distance_to(const GridSpec& grid, std::size_t flat, std::span<const double> center) {
    const auto idx = grid.unravel(flat);
    double s = 0.0;
    for (int a = 0; a < grid.dimension; ++a) {
        const double c = a < static_cast<int>(center.size()) ? center[a] : 0.0;
        const double d = grid.coordinate(idx[a]) - c;
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace expheat
