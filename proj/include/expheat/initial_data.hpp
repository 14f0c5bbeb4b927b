#pragma once

#include <memory>
#include <string>
#include <vector>

#include "expheat/spectral_grid.hpp"

namespace expheat {

enum class DataKind { gaussian_bump, log_spike, indicator, dilated, scaled };

std::string to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& name);

/// Description of an initial datum. `dilated` and `scaled` wrap `base`.
struct DataRecipe {
    DataKind kind = DataKind::gaussian_bump;
    double amplitude = 1.0;
    std::vector<double> center;
    double width = 1.0;
    /// Exponent of the log spike, amplitude * (-log(|x - c| / width))^{1/r}.
    double r = 2.0;
    std::shared_ptr<DataRecipe> base;
    double lambda = 1.0;
    double p = 1.0;
    double factor = 1.0;

    bool operator==(const DataRecipe& other) const;
};

struct GeneratedData {
    Field field;
    /// The recipe is unbounded; samples were capped at the origin-cell average.
    bool sample_capped = false;
    double cap_value = 0.0;
};

/// Quadrature points per axis for the log spike's centre-cell average.
inline constexpr int kSpikeCellQuadrature = 64;

GeneratedData generate_with_info(const DataRecipe& recipe, const GridSpec& grid);
Field generate(const DataRecipe& recipe, const GridSpec& grid);

} // namespace expheat
