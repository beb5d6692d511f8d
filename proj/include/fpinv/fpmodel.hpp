// Rounding model and first-order differential characterization.
// Every rounding operation op becomes (op)*(1+e)+d with a fresh error pair;
// the absolute rounding error of an update is bounded by
//   sum_i sup|df/de_i| * eps + sum_i sup|df/dd_i| * delta + sup|R2|
// with suprema taken by interval evaluation over a box (constant bounds),
// or symbolically via triangle inequalities in absolute-value variables.

#pragma once

#include "fpinv/ast.hpp"
#include "fpinv/cfg.hpp"
#include "fpinv/interval.hpp"
#include "fpinv/ratfunc.hpp"

#include <memory>
#include <optional>

namespace fpinv::fp {

struct FloatFormat {
    Rat eps;    // relative error bound
    Rat delta;  // absolute error bound
    enum class Rounding { Nearest, Any } rounding = Rounding::Nearest;
    std::string name = "f32";

    static FloatFormat make(const std::string& name, Rounding r);
    lang::FloatFormatSpec literal_spec() const;
};

// Rectangular region with rational endpoints, indexed like the CFG vars.
struct Box {
    std::vector<std::pair<Rat, Rat>> iv;

    Box() = default;
    explicit Box(size_t n) : iv(n, {Rat(0), Rat(0)}) {}
    size_t size() const { return iv.size(); }
    Interval interval(size_t v) const {
        return Interval(interval_of_rat(iv[v].first).lo, interval_of_rat(iv[v].second).hi);
    }
    std::vector<Interval> intervals() const {
        std::vector<Interval> out;
        out.reserve(iv.size());
        for (size_t v = 0; v < iv.size(); ++v) out.push_back(interval(v));
        return out;
    }
    bool contains(const Box& inner) const;
};

// Error-annotated expression node; err >= 0 marks a rounding site owning
// the pair (e_err, d_err).
struct FNode;
using FPtr = std::shared_ptr<const FNode>;
struct FNode {
    lang::Expr::Op op;
    int var = -1;
    Rat value;
    FPtr a, b;
    int err = -1;
};

struct AbstractedFunction {
    std::vector<FPtr> coords;        // one tree per CFG variable
    int n_err = 0;                   // error pairs 0..n_err-1
    std::vector<std::string> sites;  // per err id, operator spelling for dumps
};

// Rounding-site annotation; error ids are assigned in evaluation order and
// substituting e = d = 0 recovers the exact update.
AbstractedFunction abstract_update(const std::vector<lang::ExprPtr>& update);
AbstractedFunction abstract_expr(const lang::ExprPtr& e);

// Exact real-valued function at e = d = 0.
RatFunc real_part(const FPtr& n);

struct Partials {
    std::vector<RatFunc> de;  // d f / d e_i at (x, 0, 0)
    std::vector<RatFunc> dd;  // d f / d d_i at (x, 0, 0)
};
Partials partials_at_zero(const FPtr& coord, int n_err);

// Sound range enclosure over a box with uniform bisection to `depth`
// subdivisions per active dimension.
Interval interval_eval(const RatFunc& f, const Box& box, int depth);
// sup |f| over the box, as an exactly-representable rational.
Rat sup_abs(const RatFunc& f, const Box& box, int depth);

// sup of |d coord / d e_i| (or d_i) at e = d = 0 over the box, computed on
// the tree so that divisions stay structured.
double sup_abs_error_derivative(const FPtr& coord, int err, bool wrt_e, const Box& box, int depth);

// Constant bound vector: gamma per coordinate; exactly zero for coordinates
// without rounding sites.
struct ConstBound {
    std::vector<Rat> gamma;
};
ConstBound const_error_bound(const AbstractedFunction& f, const Box& box, const FloatFormat& fmt,
                             int depth = 3);

// Symbolic bound vector: per coordinate a polynomial with nonnegative
// coefficients over absmap-translated absolute-value variables. Requires a
// division-free update.
struct SymBound {
    std::vector<Poly> gamma;
};
SymBound symbolic_error_bound(const AbstractedFunction& f, const FloatFormat& fmt,
                              const std::map<int, int>& absmap);

// Sound bound on the Taylor remainder |R2| over box x [-eps,eps]^k x [-delta,delta]^k.
Rat second_order_bound(const FPtr& coord, int n_err, const Box& box, const FloatFormat& fmt);
// Symbolic counterpart, in absolute-value variables.
Poly second_order_bound_symbolic(const FPtr& coord, int n_err, const FloatFormat& fmt,
                                 const std::map<int, int>& absmap);

// Replaces odd powers of abs variables using t^(2k+1) <= (t^2k + t^2k+2)/2
// so the bound mentions only even powers (which rewrite to program
// variables); optional, enabled by a solver flag.
Poly evenize_abs_poly(const Poly& p);

// Tree evaluation with concrete error values, for simulation oracles.
double eval_sampled(const FPtr& n, const std::vector<double>& x, const std::vector<double>& e,
                    const std::vector<double>& d);

// Per-site first-order error attribution, for debugging.
std::string attribution_dump(const AbstractedFunction& f, const Box& box, const FloatFormat& fmt,
                             const VarTable& vars);

} // namespace fpinv::fp
