#include "expheat/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "expheat/decay_analysis.hpp"

namespace expheat {

std::string to_string(DataKind kind) {
    switch (kind) {
    case DataKind::gaussian_bump: return "gaussian_bump";
    case DataKind::log_spike: return "log_spike";
    case DataKind::indicator: return "indicator";
    case DataKind::dilated: return "dilated";
    case DataKind::scaled: return "scaled";
    }
    return "unknown";
}

DataKind data_kind_from_string(const std::string& name) {
    for (DataKind k : {DataKind::gaussian_bump, DataKind::log_spike, DataKind::indicator, DataKind::dilated,
                       DataKind::scaled})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown data kind '" + name + "'");
}

bool DataRecipe::operator==(const DataRecipe& o) const {
    if (kind != o.kind || amplitude != o.amplitude || center != o.center || width != o.width || r != o.r ||
        lambda != o.lambda || p != o.p || factor != o.factor)
        return false;
    if (!base || !o.base) return !base && !o.base;
    return *base == *o.base;
}

namespace {

std::vector<double> resolved_center(const DataRecipe& recipe, const GridSpec& grid) {
    if (recipe.center.empty()) return std::vector<double>(grid.dimension, 0.0);
    if (static_cast<int>(recipe.center.size()) != grid.dimension)
        throw std::invalid_argument("data center has " + std::to_string(recipe.center.size()) +
                                    " coordinates on a " + std::to_string(grid.dimension) + "-d grid");
    return recipe.center;
}

void require_inside(const std::vector<double>& c, double radius, const GridSpec& grid, const char* what) {
    for (double x : c) {
        if (std::abs(x) + radius > grid.half_width)
            throw std::invalid_argument(std::string(what) + ": support exceeds the box [-L, L)^n");
    }
}

double spike_value(double dist, const DataRecipe& recipe) {
    if (dist >= recipe.width || recipe.amplitude == 0.0) return 0.0;
    if (dist <= 0.0) return recipe.amplitude > 0.0 ? kInf : -kInf;
    return recipe.amplitude * std::pow(-std::log(dist / recipe.width), 1.0 / recipe.r);
}

/// Average of the spike over the grid cell centred at the sample nearest c.
double spike_cell_average(const DataRecipe& recipe, const std::vector<double>& c, const GridSpec& grid) {
    const int n = grid.dimension;
    const double h = grid.spacing();
    std::array<double, 3> origin{};
    for (int a = 0; a < n; ++a) {
        const double idx = std::round((c[a] + grid.half_width) / h);
        origin[a] = grid.coordinate(static_cast<int>(idx));
    }
    const int m = kSpikeCellQuadrature;
    std::size_t total = 1;
    for (int a = 0; a < n; ++a) total *= m;
    double sum = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        double d2 = 0.0;
        for (int a = n - 1; a >= 0; --a) {
            const int j = static_cast<int>(rest % m);
            rest /= m;
            const double x = origin[a] - 0.5 * h + (j + 0.5) * h / m;
            d2 += (x - c[a]) * (x - c[a]);
        }
        sum += spike_value(std::sqrt(d2), recipe);
    }
    return sum / static_cast<double>(total);
}

} // namespace

GeneratedData generate_with_info(const DataRecipe& recipe, const GridSpec& grid) {
    if (!std::isfinite(recipe.amplitude)) throw std::invalid_argument("data amplitude must be finite");
    GeneratedData out;
    switch (recipe.kind) {
    case DataKind::gaussian_bump: {
        if (!(recipe.width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be positive");
        const auto c = resolved_center(recipe, grid);
        // Tail below 1e-12 of the peak at the nearest box face.
        require_inside(c, recipe.width * std::sqrt(12.0 * std::log(10.0)), grid, "gaussian_bump");
        const double w2 = recipe.width * recipe.width;
        out.field = sample_field(grid, [&](std::span<const double> x) {
            double d2 = 0.0;
            for (std::size_t a = 0; a < x.size(); ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
            return recipe.amplitude * std::exp(-d2 / w2);
        });
        return out;
    }
    case DataKind::indicator: {
        if (!(recipe.width > 0.0)) throw std::invalid_argument("indicator: width must be positive");
        const auto c = resolved_center(recipe, grid);
        require_inside(c, recipe.width, grid, "indicator");
        std::vector<double> vals(grid.size(), 0.0);
        for (std::size_t flat = 0; flat < vals.size(); ++flat)
            if (distance_to(grid, flat, c) < recipe.width) vals[flat] = recipe.amplitude;
        out.field = Field(grid, std::move(vals));
        return out;
    }
    case DataKind::log_spike: {
        if (!(recipe.width > 0.0)) throw std::invalid_argument("log_spike: width must be positive");
        if (!(recipe.r > 1.0)) throw std::invalid_argument("log_spike: r must exceed 1");
        const auto c = resolved_center(recipe, grid);
        require_inside(c, recipe.width, grid, "log_spike");
        const double cap = spike_cell_average(recipe, c, grid);
        std::vector<double> vals(grid.size(), 0.0);
        for (std::size_t flat = 0; flat < vals.size(); ++flat) {
            const double v = spike_value(distance_to(grid, flat, c), recipe);
            vals[flat] = recipe.amplitude >= 0.0 ? std::min(v, cap) : std::max(v, cap);
        }
        out.field = Field(grid, std::move(vals));
        out.sample_capped = true;
        out.cap_value = cap;
        return out;
    }
    case DataKind::dilated: {
        if (!recipe.base) throw std::invalid_argument("dilated: base recipe missing");
        auto inner = generate_with_info(*recipe.base, grid);
        inner.field = dilation_family(inner.field, recipe.lambda, recipe.p);
        inner.cap_value *= std::pow(recipe.lambda, grid.dimension / recipe.p);
        return inner;
    }
    case DataKind::scaled: {
        if (!recipe.base) throw std::invalid_argument("scaled: base recipe missing");
        if (!std::isfinite(recipe.factor)) throw std::invalid_argument("scaled: factor must be finite");
        auto inner = generate_with_info(*recipe.base, grid);
        inner.field = inner.field.scaled(recipe.factor);
        inner.cap_value *= recipe.factor;
        return inner;
    }
    }
    throw std::invalid_argument("unknown data kind");
}

Field generate(const DataRecipe& recipe, const GridSpec& grid) { return generate_with_info(recipe, grid).field; }

} // namespace expheat
