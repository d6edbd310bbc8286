#include "laxol/splitting.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "laxol/errors.hpp"

namespace laxol {

namespace {

std::vector<std::size_t> row_major_strides(const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> strides(dims.size(), 1);
    for (std::size_t a = dims.size(); a-- > 1;) strides[a - 1] = strides[a] * dims[a];
    return strides;
}

}  // namespace

TensorFn make_tensor(std::vector<double> values, std::vector<std::size_t> dims, double step,
                     std::vector<double> origins, bool periodic) {
    if (dims.empty()) throw InvalidInput("make_tensor: rank must be >= 1");
    if (origins.size() != dims.size()) throw InvalidInput("make_tensor: origins/dims mismatch");
    std::size_t total = 1;
    for (std::size_t d : dims) {
        if (d < 1) throw InvalidInput("make_tensor: empty axis");
        total *= d;
    }
    if (values.size() != total) throw InvalidInput("make_tensor: value count does not match dims");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidInput("make_tensor: non-finite sample");
    if (!(step > 0.0)) throw InvalidInput("make_tensor: step must be positive");
    return TensorFn{std::move(values), std::move(dims), step, std::move(origins), periodic};
}

TensorFn split_step_nd(const TensorFn& u, double t, const SplitSpec& spec,
                       const SchemeParams& params) {
    if (spec.kinetics.size() != u.rank())
        throw InvalidInput("split_step_nd: kinetic part is not separable over the tensor axes (" +
                           std::to_string(spec.kinetics.size()) + " conjugates for rank " +
                           std::to_string(u.rank()) + ")");
    if (u.step != params.epsilon())
        throw InvalidInput("split_step_nd: tensor step does not match params.epsilon()");
    if (u.periodic) {
        for (std::size_t d : u.dims)
            if (d != static_cast<std::size_t>(params.n_space))
                throw InvalidInput("split_step_nd: periodic axes must hold one unit period");
    }

    const auto strides = row_major_strides(u.dims);
    TensorFn out = u;

    for (std::size_t axis = 0; axis < u.rank(); ++axis) {
        const Kernel kernel = build_kernel(spec.kinetics[axis], params);
        const std::size_t len = u.dims[axis];
        const std::size_t stride = strides[axis];
        const std::size_t lines = out.size() / len;

        std::vector<double> line(u.periodic ? len + 1 : len);
        for (std::size_t l = 0; l < lines; ++l) {
            // Decompose the line number into the fixed coordinates around axis.
            const std::size_t outer = l / stride;  // combined index of axes before `axis`
            const std::size_t inner = l % stride;
            const std::size_t base = outer * stride * len + inner;

            for (std::size_t k = 0; k < len; ++k) line[k] = out.values[base + k * stride];
            GridFn g;
            if (u.periodic) {
                line[len] = line[0];
                g = GridFn{line, u.step, u.origins[axis], true};
            } else {
                g = GridFn{line, u.step, u.origins[axis], false};
            }
            GridFn swept = kinetic_convolve(g, kernel, params.eta);
            for (std::size_t k = 0; k < len; ++k) out.values[base + k * stride] = swept.values[k];
        }
    }

    if (spec.potential) {
        const double tv =
            params.v_sampling == PotentialSampling::Arrival ? t + params.tau : t;
        std::vector<double> coords(u.rank());
        std::vector<std::size_t> idx(u.rank(), 0);
        for (std::size_t flat = 0; flat < out.size(); ++flat) {
            std::size_t rem = flat;
            for (std::size_t a = 0; a < u.rank(); ++a) {
                idx[a] = rem / strides[a];
                rem %= strides[a];
                coords[a] = u.origins[a] + static_cast<double>(idx[a]) * u.step;
            }
            const double v = spec.potential(tv, coords);
            if (!std::isfinite(v))
                throw EvaluationError("split_step_nd: potential sample is not finite");
            out.values[flat] -= params.tau * v;
        }
    }
    return out;
}

}  // namespace laxol
