#include "fft_engine.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace expheat::detail {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(const GridSpec& grid, int sign) {
        const auto key = std::make_tuple(grid.dimension, grid.points_per_axis, sign);
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        int dims[3] = {grid.points_per_axis, grid.points_per_axis, grid.points_per_axis};
        std::vector<std::complex<double>> scratch(grid.size());
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft(grid.dimension, dims, buf, buf, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

} // namespace

void fft_inplace(std::vector<std::complex<double>>& data, const GridSpec& grid, int sign) {
    if (data.size() != grid.size()) throw std::invalid_argument("fft: buffer/grid size mismatch");
    fftw_plan plan = cache().get(grid, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

} // namespace expheat::detail
