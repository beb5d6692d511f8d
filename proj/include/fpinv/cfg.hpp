// Floating-point control flow graphs: one location per program counter plus
// a termination location, transitions carrying guard conjunctions (DNF
// clauses get their own transitions) and per-variable update expressions.
// summarize() composes loop-free segments between cut points.

#pragma once

#include "fpinv/ast.hpp"
#include "fpinv/ratfunc.hpp"

#include <functional>
#include <set>

namespace fpinv::cfg {

struct GuardAtom {
    lang::ExprPtr a1, a2;  // a1 <= a2 / a1 < a2
    bool strict = false;
    bool int_kind = false;  // both sides int-kind: exact comparison
};
using GuardConj = std::vector<GuardAtom>;

struct Transition {
    int src = 0, tgt = 0;
    GuardConj guard;
    // Updated expression per CFG variable (classified trees over program vars);
    // identity coordinates hold plain Var nodes.
    std::vector<lang::ExprPtr> update;
    // Global ids of the rounding sites in the update, disjoint across
    // transitions.
    std::vector<int> error_vars;
};

struct FpCfg {
    VarTable vars;                  // X, in program declaration order (live vars after summarize)
    std::vector<lang::Kind> kinds;  // parallel to vars
    std::vector<lang::InitAtom> init;
    int initial = 0;
    int terminal = 0;
    int n_locations = 0;
    std::vector<Transition> transitions;
    int target = -1;   // index into vars, -1 if absent
    long iterations = -1;
    std::vector<lang::CoarseHint> coarse_hints;  // var ids in CFG order

    bool written(int var_index) const;
    std::string dump() const;
};

// Per-statement graph, §2.3 construction. Requires a classified program.
FpCfg build_cfg(const lang::SourceProgram& p);

// Compose loop-free segments between cut points; throws if a cycle avoids
// all cut points. Dead coordinates (written before read on every segment,
// not the target, not in guards or the precondition) are dropped from X.
FpCfg summarize(const FpCfg& g, const std::set<int>& cutpoints);

// Cut points the benchmark harness uses: initial, loop heads, termination.
std::set<int> default_cutpoints(const FpCfg& g);

// A premise h >= 0 (possibly rational; division cleared later).
struct RelaxedAtom {
    RatFunc rf;
};

// Sound bound on the absolute rounding error of a float expression,
// returned as a polynomial (a constant one under a box regime).
using BoundProvider = std::function<Poly(const lang::ExprPtr&)>;

// Rounding-aware guard over-approximation: strict float atoms weaken to
// non-strict and each side is slackened by its error bound; strict integer
// atoms tighten (a < b becomes a <= b-1); conjunctions map atom-wise.
std::vector<RelaxedAtom> overapprox_guard(const GuardConj& guard, const BoundProvider& bound);

RatFunc expr_to_ratfunc(const lang::ExprPtr& e);

} // namespace fpinv::cfg
