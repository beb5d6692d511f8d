// Tentative coarse invariants: declared by pragma, iterated forward with
// interval arithmetic for bounded loops, or estimated from concrete
// floating-point simulation runs.

#pragma once

#include "fpinv/cfg.hpp"
#include "fpinv/fpmodel.hpp"

namespace fpinv::coarse {

struct VarRange {
    Rat lo, hi;
    bool verified = false;
};

enum class Provenance { Declared, IntervalIterated, DataDriven };

struct CoarseInvariant {
    std::vector<VarRange> ranges;  // per CFG variable, at the loop-head location
    Provenance provenance = Provenance::DataDriven;

    fp::Box box() const {
        fp::Box b(ranges.size());
        for (size_t v = 0; v < ranges.size(); ++v) b.iv[v] = {ranges[v].lo, ranges[v].hi};
        return b;
    }
    // Scale every unverified dimension about its center (the retry step).
    void enlarge(const Rat& factor);
};

struct CoarseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Interval hull of the precondition; throws CoarseError when a variable has
// no finite bounds there.
fp::Box init_box(const cfg::FpCfg& g);

// #coarse pragma ranges; unwritten variables fall back to the precondition.
CoarseInvariant from_declared(const cfg::FpCfg& g);

// Forward interval iteration with per-step rounding slack over a summarized
// CFG; k < 0 derives the bound from an integer loop counter or the
// #iterations pragma. Integer counters are accelerated to their guard bound.
CoarseInvariant from_interval_iteration(const cfg::FpCfg& g, const fp::FloatFormat& fmt, long k = -1,
                                        int depth = 3);

// Concrete float32/float64 execution of the source program from sampled
// precondition points; the hull of the states observed at the outer loop
// head, padded outward by `pad` (fractional; 0 keeps the exact hull).
CoarseInvariant data_driven(const lang::SourceProgram& p, const cfg::FpCfg& g,
                            const fp::FloatFormat& fmt, int n_inputs, long n_iters, double pad,
                            uint64_t seed);

} // namespace fpinv::coarse
