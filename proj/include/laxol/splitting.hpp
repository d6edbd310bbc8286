#pragma once

#include <functional>
#include <span>
#include <vector>

#include "laxol/scheme.hpp"

namespace laxol {

// Row-major tensor sampling of u on a uniform n-D grid with a common step.
// Periodic tensors store only the fundamental domain (no duplicated seam).
struct TensorFn {
    std::vector<double> values;
    std::vector<std::size_t> dims;
    double step = 1.0;
    std::vector<double> origins;
    bool periodic = true;

    std::size_t rank() const { return dims.size(); }
    std::size_t size() const { return values.size(); }
};

TensorFn make_tensor(std::vector<double> values, std::vector<std::size_t> dims, double step,
                     std::vector<double> origins, bool periodic);

using PotentialNd = std::function<double(double, std::span<const double>)>;

// Separable kinetic part: one 1-D conjugate per axis. An empty potential
// means V == 0.
struct SplitSpec {
    std::vector<Kinetic> kinetics;
    PotentialNd potential;
};

// One fully discrete step in n dimensions: sweep the 1-D kinetic convolution
// along each axis in ascending order, then subtract tau*V once. The sweep
// order does not change the result; the composition equals the direct n-D
// minimization over the product grid.
TensorFn split_step_nd(const TensorFn& u, double t, const SplitSpec& spec,
                       const SchemeParams& params);

}  // namespace laxol
