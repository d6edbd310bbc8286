#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "laxol/grid_fn.hpp"

namespace laxol {

enum class BlockKind { Convex, Concave };

// Half-open in segment terms, closed in sample terms: a block covers samples
// start..end inclusive and adjacent blocks share one boundary sample.
struct Block {
    BlockKind kind;
    std::size_t start;
    std::size_t end;
};

struct BlockDecomposition {
    std::vector<Block> blocks;
    double eta = 0.0;
};

// Quadratic-cost ground truth: result[k] = min_{i+j=k} f[i] + g[j], with index
// range 0..n+m and origin f.origin + g.origin. Steps must match.
GridFn conv_naive(const GridFn& f, const GridFn& g);

// Linear-time convolution of two convex functions. Output samples are emitted
// along the sorted merge of the two slope sequences; each output value is a
// single sum f[i] + g[j], never an accumulation.
GridFn conv_convex_convex(const GridFn& f, const GridFn& g);

// Linear-time convolution of a convex f with a concave g. The result carries
// the convex / concave / convex envelope structure.
GridFn conv_convex_concave(const GridFn& f, const GridFn& g);

// Maximal convex/concave runs of u. With eta = 0 the runs are exact; with
// eta > 0 convex blocks tolerate slope increments >= -eta and concave blocks
// increments <= +eta. Runs whose increments stay inside [-eta, eta] take the
// kind of the first determining increment and default to Convex.
BlockDecomposition decompose(const GridFn& u, double eta);

struct FastConvResult {
    GridFn fn;
    std::int64_t block_count = 0;
};

// Block-decomposed convolution of a convex kernel against an arbitrary u:
// decompose u, convolve each block by kind, aggregate by pointwise minimum.
// With eta = 0 this equals conv_naive(kernel, u).
FastConvResult conv_fast(const GridFn& kernel, const GridFn& u, double eta);
FastConvResult conv_fast(const GridFn& kernel, std::span<const double> kernel_slopes,
                         const GridFn& u, double eta);

struct Placed {
    const GridFn* fn;
    std::int64_t offset;  // fn's index 0 sits at aggregate index `offset`
};

// Pointwise minimum over the union of index ranges. The union must be gapless
// (+infinity never materializes in a GridFn).
GridFn min_pointwise(const std::vector<Placed>& parts);

// Index-operation counter for complexity checks. Single-threaded use only.
std::int64_t conv_op_count();
void reset_conv_op_count();

}  // namespace laxol
