#pragma once

#include <cmath>
#include <random>

#include "expheat/spectral_grid.hpp"

namespace testing_support {

/// Unit mass concentrated in the centre cell.
inline expheat::Field cell_mass(const expheat::GridSpec& g, double mass = 1.0) {
    expheat::Field f(g);
    std::array<int, 3> idx{};
    for (int a = 0; a < g.dimension; ++a) idx[a] = g.center_index();
    f[g.ravel(idx)] = mass / g.cell_volume();
    return f;
}

/// Smooth random field: a few Gaussian bumps with random centres and widths.
inline expheat::Field random_bumps(const expheat::GridSpec& g, std::mt19937_64& rng, bool nonnegative) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> vals(g.size(), 0.0);
    const int bumps = 1 + static_cast<int>(rng() % 3);
    for (int b = 0; b < bumps; ++b) {
        std::array<double, 3> c{};
        for (int a = 0; a < g.dimension; ++a) c[a] = 0.25 * g.half_width * uni(rng);
        const double w = 1.0 + std::abs(uni(rng));
        const double amp = nonnegative ? 0.5 + std::abs(uni(rng)) : uni(rng);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const auto idx = g.unravel(i);
            double d2 = 0.0;
            for (int a = 0; a < g.dimension; ++a) d2 += std::pow(g.coordinate(idx[a]) - c[a], 2);
            vals[i] += amp * std::exp(-d2 / (w * w));
        }
    }
    return expheat::Field(g, std::move(vals));
}

/// Uniform noise on every sample.
inline expheat::Field noise(const expheat::GridSpec& g, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<double> vals(g.size());
    for (double& v : vals) v = uni(rng);
    return expheat::Field(g, std::move(vals));
}

} // namespace testing_support
