#include "laxol/minplus.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <string>

#include "laxol/errors.hpp"
#include "laxol/parallel.hpp"

namespace laxol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::atomic<std::int64_t> g_ops{0};

void check_same_step(const GridFn& f, const GridFn& g, const char* who) {
    if (f.step != g.step)
        throw InvalidInput(std::string(who) + ": mismatched grid steps");
}

void require_convex(const GridFn& f, const char* who, const char* name) {
    std::size_t bad = 0;
    if (!is_convex(f, &bad))
        throw InvalidInput(std::string(who) + ": " + name +
                           " is not convex, slope drops at segment " + std::to_string(bad + 1));
}

void require_concave(const GridFn& f, const char* who, const char* name) {
    std::size_t bad = 0;
    if (!is_concave(f, &bad))
        throw InvalidInput(std::string(who) + ": " + name +
                           " is not concave, slope rises at segment " + std::to_string(bad + 1));
}

// Merge form: output k is f[i]+g[j] at the merge state with i+j = k, the
// slopes being consumed in nondecreasing order. Ties hand the step to g.
std::vector<double> merge_convolve(std::span<const double> fv, std::span<const double> fs,
                                   std::span<const double> gv, std::span<const double> gs,
                                   std::int64_t& ops) {
    const std::size_t n = fs.size(), m = gs.size();
    std::vector<double> out(n + m + 1);
    out[0] = fv[0] + gv[0];
    std::size_t i = 0, j = 0;
    for (std::size_t k = 1; k <= n + m; ++k) {
        const bool take_f = i < n && (j == m || fs[i] < gs[j]);
        if (take_f)
            ++i;
        else
            ++j;
        out[k] = fv[i] + gv[j];
    }
    ops += static_cast<std::int64_t>(n + m + 1);
    return out;
}

// f convex, g concave. The pointer i walks up through f's flat start, then
// only downward while the concave segments of g are laid, then up again for
// the tail; total work is O(n + m).
std::vector<double> envelope_convolve(std::span<const double> fv, std::span<const double> fs,
                                      std::span<const double> gv, std::span<const double> gs,
                                      std::int64_t& ops) {
    const std::size_t n = fs.size(), m = gs.size();
    std::vector<double> out(n + m + 1, kInf);
    std::int64_t work = static_cast<std::int64_t>(n + m + 1);
    if (m == 0) {
        for (std::size_t k = 0; k <= n; ++k) out[k] = fv[k] + gv[0];
        ops += work;
        return out;
    }
    if (n == 0) {
        for (std::size_t k = 0; k <= m; ++k) out[k] = fv[0] + gv[k];
        ops += work;
        return out;
    }

    std::size_t i = 0;
    out[0] = fv[0] + gv[0];
    while (i < n && fs[i] <= gs[0]) {
        ++i;
        out[i] = fv[i] + gv[0];
        ++work;
    }
    std::size_t j = 1;
    out[i + j] = std::min(out[i + j], fv[i] + gv[1]);
    while (j < m) {
        while (i > 0 && gs[j] < fs[i - 1]) {
            --i;
            ++work;
        }
        out[i + j] = std::min(out[i + j], fv[i] + gv[j]);
        out[i + j + 1] = std::min(out[i + j + 1], fv[i] + gv[j + 1]);
        ++j;
        ++work;
    }
    while (i < n) {
        ++i;
        out[i + m] = std::min(out[i + m], fv[i] + gv[m]);
        ++work;
    }
    ops += work;
    return out;
}

GridFn wrap(std::vector<double> values, const GridFn& f, const GridFn& g) {
    return GridFn{std::move(values), f.step, f.origin + g.origin, false};
}

}  // namespace

std::int64_t conv_op_count() { return g_ops.load(std::memory_order_relaxed); }
void reset_conv_op_count() { g_ops.store(0, std::memory_order_relaxed); }

GridFn conv_naive(const GridFn& f, const GridFn& g) {
    check_same_step(f, g, "conv_naive");
    const auto& a = f.values;
    const auto& b = g.values;
    std::vector<double> out(a.size() + b.size() - 1, kInf);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] = std::min(out[i + j], a[i] + b[j]);
    g_ops.fetch_add(static_cast<std::int64_t>(a.size() * b.size()), std::memory_order_relaxed);
    return wrap(std::move(out), f, g);
}

GridFn conv_convex_convex(const GridFn& f, const GridFn& g) {
    check_same_step(f, g, "conv_convex_convex");
    require_convex(f, "conv_convex_convex", "f");
    require_convex(g, "conv_convex_convex", "g");
    const auto fs = slopes(f);
    const auto gs = slopes(g);
    std::int64_t ops = 0;
    auto out = merge_convolve(f.values, fs, g.values, gs, ops);
    g_ops.fetch_add(ops, std::memory_order_relaxed);
    return wrap(std::move(out), f, g);
}

GridFn conv_convex_concave(const GridFn& f, const GridFn& g) {
    check_same_step(f, g, "conv_convex_concave");
    require_convex(f, "conv_convex_concave", "f");
    require_concave(g, "conv_convex_concave", "g");
    const auto fs = slopes(f);
    const auto gs = slopes(g);
    std::int64_t ops = 0;
    auto out = envelope_convolve(f.values, fs, g.values, gs, ops);
    g_ops.fetch_add(ops, std::memory_order_relaxed);
    return wrap(std::move(out), f, g);
}

BlockDecomposition decompose(const GridFn& u, double eta) {
    if (eta < 0.0) throw InvalidInput("decompose: eta must be >= 0");
    BlockDecomposition dec;
    dec.eta = eta;
    const std::size_t n = u.n();
    if (n == 0) {
        dec.blocks.push_back({BlockKind::Convex, 0, 0});
        return dec;
    }
    const auto s = slopes(u);
    std::size_t b = 0;
    while (b < n) {
        bool determined = false;
        BlockKind kind = BlockKind::Convex;
        std::size_t e = b + 1;  // block covers samples [b, e]
        while (e < n) {
            const double inc = s[e] - s[e - 1];
            if (!determined) {
                if (inc > eta) {
                    determined = true;
                    kind = BlockKind::Convex;
                } else if (inc < -eta) {
                    determined = true;
                    kind = BlockKind::Concave;
                }
            } else if (kind == BlockKind::Convex) {
                if (!(inc >= -eta)) break;
            } else {
                if (!(inc <= eta)) break;
            }
            ++e;
        }
        dec.blocks.push_back({kind, b, e});
        b = e;
    }
    return dec;
}

FastConvResult conv_fast(const GridFn& kernel, const GridFn& u, double eta) {
    require_convex(kernel, "conv_fast", "kernel");
    const auto ks = slopes(kernel);
    return conv_fast(kernel, ks, u, eta);
}

namespace {

// The relaxed merge misorders slopes by up to eta per sample, so its value
// error grows with block length. Bounding the block length bounds the error
// at roughly eta times this cap; the exact path needs no split.
constexpr std::size_t kRelaxedBlockCap = 48;

std::vector<Block> capped_blocks(const BlockDecomposition& dec, double eta) {
    if (eta <= 0.0) return dec.blocks;
    std::vector<Block> out;
    for (const Block& b : dec.blocks) {
        if (b.end - b.start <= kRelaxedBlockCap) {
            out.push_back(b);
            continue;
        }
        for (std::size_t s = b.start; s < b.end; s += kRelaxedBlockCap)
            out.push_back({b.kind, s, std::min(b.end, s + kRelaxedBlockCap)});
    }
    return out;
}

}  // namespace

FastConvResult conv_fast(const GridFn& kernel, std::span<const double> kernel_slopes,
                         const GridFn& u, double eta) {
    check_same_step(kernel, u, "conv_fast");
    const auto dec = decompose(u, eta);
    const auto us = slopes(u);

    const std::vector<Block> blocks = capped_blocks(dec, eta);
    const std::size_t nblocks = blocks.size();

    std::vector<GridFn> parts(nblocks);
    std::vector<std::int64_t> part_ops(nblocks, 0);
    parallel_for(nblocks, [&](std::size_t b) {
        const Block& blk = blocks[b];
        const std::span<const double> gv(u.values.data() + blk.start, blk.end - blk.start + 1);
        const std::span<const double> gs(us.data() + blk.start, blk.end - blk.start);
        std::vector<double> vals =
            blk.kind == BlockKind::Convex
                ? merge_convolve(kernel.values, kernel_slopes, gv, gs, part_ops[b])
                : envelope_convolve(kernel.values, kernel_slopes, gv, gs, part_ops[b]);
        parts[b] = GridFn{std::move(vals), u.step,
                          kernel.origin + u.origin + static_cast<double>(blk.start) * u.step,
                          false};
    });

    std::int64_t total_ops = 0;
    std::vector<Placed> placed(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        placed[b] = Placed{&parts[b], static_cast<std::int64_t>(blocks[b].start)};
        total_ops += part_ops[b];
    }
    g_ops.fetch_add(total_ops, std::memory_order_relaxed);
    GridFn out = min_pointwise(placed);
    return FastConvResult{std::move(out), static_cast<std::int64_t>(nblocks)};
}

GridFn min_pointwise(const std::vector<Placed>& parts) {
    if (parts.empty()) throw InvalidInput("min_pointwise: empty list");
    const double step = parts.front().fn->step;
    std::int64_t lo = parts.front().offset;
    std::int64_t hi = parts.front().offset;
    for (const Placed& p : parts) {
        if (p.fn->step != step) throw InvalidInput("min_pointwise: mismatched grid steps");
        lo = std::min(lo, p.offset);
        hi = std::max(hi, p.offset + static_cast<std::int64_t>(p.fn->n()));
    }
    std::vector<double> out(static_cast<std::size_t>(hi - lo + 1), kInf);
    for (const Placed& p : parts) {
        const std::size_t base = static_cast<std::size_t>(p.offset - lo);
        for (std::size_t j = 0; j < p.fn->size(); ++j)
            out[base + j] = std::min(out[base + j], p.fn->values[j]);
    }
    for (double v : out)
        if (v == kInf) throw InvalidInput("min_pointwise: index ranges leave a gap");
    g_ops.fetch_add(static_cast<std::int64_t>(out.size()), std::memory_order_relaxed);
    const Placed& first = parts.front();
    const double base_origin = first.fn->origin - static_cast<double>(first.offset) * step;
    return GridFn{std::move(out), step, base_origin + static_cast<double>(lo) * step, false};
}

}  // namespace laxol
