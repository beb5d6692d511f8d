#include "fpinv/fpmodel.hpp"

#include <functional>
#include <sstream>
#include <unordered_map>

namespace fpinv::fp {

using lang::Expr;

FloatFormat FloatFormat::make(const std::string& name, Rounding r) {
    FloatFormat f;
    f.name = name;
    f.rounding = r;
    if (name == "f32") {
        f.eps = r == Rounding::Nearest ? rat_pow2(-24) : rat_pow2(-23);
        f.delta = r == Rounding::Nearest ? rat_pow2(-150) : rat_pow2(-149);
    } else if (name == "f64") {
        f.eps = r == Rounding::Nearest ? rat_pow2(-53) : rat_pow2(-52);
        f.delta = r == Rounding::Nearest ? rat_pow2(-1075) : rat_pow2(-1074);
    } else {
        throw std::invalid_argument("unknown float format: " + name);
    }
    return f;
}

lang::FloatFormatSpec FloatFormat::literal_spec() const {
    return lang::FloatFormatSpec{name == "f32" ? 24 : 53};
}

bool Box::contains(const Box& inner) const {
    if (iv.size() != inner.iv.size()) return false;
    for (size_t v = 0; v < iv.size(); ++v)
        if (inner.iv[v].first < iv[v].first || inner.iv[v].second > iv[v].second) return false;
    return true;
}

// ---- abstraction -----------------------------------------------------------

namespace {

struct Abstractor {
    int next_err = 0;
    std::vector<std::string> sites;

    FPtr run(const lang::ExprPtr& e) {
        auto n = std::make_shared<FNode>();
        n->op = e->op;
        switch (e->op) {
            case Expr::Op::Var: n->var = e->var; break;
            case Expr::Op::Const: n->value = e->value; break;
            default:
                n->a = run(e->a);
                n->b = run(e->b);
                if (e->rounds) {
                    n->err = next_err++;
                    sites.push_back(std::string(1, "+-*/"[static_cast<int>(e->op) - 2]));
                }
        }
        return n;
    }
};

} // namespace

AbstractedFunction abstract_update(const std::vector<lang::ExprPtr>& update) {
    Abstractor a;
    AbstractedFunction f;
    for (auto& e : update) f.coords.push_back(a.run(e));
    f.n_err = a.next_err;
    f.sites = std::move(a.sites);
    return f;
}

AbstractedFunction abstract_expr(const lang::ExprPtr& e) { return abstract_update({e}); }

RatFunc real_part(const FPtr& n) {
    switch (n->op) {
        case Expr::Op::Var: return RatFunc::variable(n->var);
        case Expr::Op::Const: return RatFunc::constant(n->value);
        case Expr::Op::Add: return real_part(n->a) + real_part(n->b);
        case Expr::Op::Sub: return real_part(n->a) - real_part(n->b);
        case Expr::Op::Mul: return real_part(n->a) * real_part(n->b);
        case Expr::Op::Div: return real_part(n->a) / real_part(n->b);
    }
    throw std::logic_error("unreachable");
}

// ---- symbolic partials at e = d = 0 ---------------------------------------

namespace {

struct ZeroDeriv {
    bool wrt_e;  // differentiate by e_i (true) or d_i
    int i;
    std::unordered_map<const FNode*, RatFunc> val0, der;

    const RatFunc& value0(const FPtr& n) {
        auto it = val0.find(n.get());
        if (it != val0.end()) return it->second;
        RatFunc v;
        switch (n->op) {
            case Expr::Op::Var: v = RatFunc::variable(n->var); break;
            case Expr::Op::Const: v = RatFunc::constant(n->value); break;
            case Expr::Op::Add: v = value0(n->a) + value0(n->b); break;
            case Expr::Op::Sub: v = value0(n->a) - value0(n->b); break;
            case Expr::Op::Mul: v = value0(n->a) * value0(n->b); break;
            case Expr::Op::Div: v = value0(n->a) / value0(n->b); break;
        }
        return val0.emplace(n.get(), std::move(v)).first->second;
    }

    // d node / d y_i evaluated at e = d = 0. For a rounding node with pair j:
    // node = inner*(1+e_j) + d_j, so the derivative picks up inner (e case)
    // or 1 (d case) exactly when j == i.
    RatFunc deriv(const FPtr& n) {
        auto it = der.find(n.get());
        if (it != der.end()) return it->second;
        RatFunc r = RatFunc(Poly(Rat(0)));
        switch (n->op) {
            case Expr::Op::Var:
            case Expr::Op::Const: break;
            case Expr::Op::Add: r = deriv(n->a) + deriv(n->b); break;
            case Expr::Op::Sub: r = deriv(n->a) - deriv(n->b); break;
            case Expr::Op::Mul: r = deriv(n->a) * value0(n->b) + value0(n->a) * deriv(n->b); break;
            case Expr::Op::Div: {
                const RatFunc& va = value0(n->a);
                const RatFunc& vb = value0(n->b);
                r = (deriv(n->a) * vb - va * deriv(n->b)) / (vb * vb);
                break;
            }
        }
        if (n->err == i) {
            if (wrt_e) {
                // inner value of the operation itself
                RatFunc inner;
                switch (n->op) {
                    case Expr::Op::Add: inner = value0(n->a) + value0(n->b); break;
                    case Expr::Op::Sub: inner = value0(n->a) - value0(n->b); break;
                    case Expr::Op::Mul: inner = value0(n->a) * value0(n->b); break;
                    case Expr::Op::Div: inner = value0(n->a) / value0(n->b); break;
                    default: break;
                }
                r = r + inner;
            } else {
                r = r + RatFunc::constant(Rat(1));
            }
        }
        return der.emplace(n.get(), std::move(r)).first->second;
    }
};

bool tree_has_err(const FPtr& n, int i, std::unordered_map<const FNode*, bool>& memo) {
    if (n->op == Expr::Op::Var || n->op == Expr::Op::Const) return false;
    auto it = memo.find(n.get());
    if (it != memo.end()) return it->second;
    bool r = n->err == i || tree_has_err(n->a, i, memo) || tree_has_err(n->b, i, memo);
    memo[n.get()] = r;
    return r;
}

} // namespace

Partials partials_at_zero(const FPtr& coord, int n_err) {
    Partials p;
    for (int i = 0; i < n_err; ++i) {
        std::unordered_map<const FNode*, bool> memo;
        if (!tree_has_err(coord, i, memo)) {
            p.de.push_back(RatFunc(Poly(Rat(0))));
            p.dd.push_back(RatFunc(Poly(Rat(0))));
            continue;
        }
        ZeroDeriv ze{true, i, {}, {}};
        p.de.push_back(ze.deriv(coord));
        ZeroDeriv zd{false, i, {}, {}};
        p.dd.push_back(zd.deriv(coord));
    }
    return p;
}

// ---- interval machinery -----------------------------------------------------

namespace {

Interval eval_cell(const RatFunc& f, const std::vector<Interval>& cell) { return f.eval_interval(cell); }

// Uniform subdivision over the active dimensions only.
Interval eval_subdivided(const RatFunc& f, const std::vector<Interval>& box, int depth) {
    std::vector<int> active;
    for (int v : f.num.vars_used()) active.push_back(v);
    for (int v : f.den.vars_used())
        if (std::find(active.begin(), active.end(), v) == active.end()) active.push_back(v);
    std::sort(active.begin(), active.end());
    if (depth <= 0 || active.empty()) return eval_cell(f, box);

    int cells_per_dim = 1 << depth;
    // cap total cell count to keep refinement affordable
    while (active.size() > 1 && static_cast<double>(std::pow(cells_per_dim, active.size())) > 4096.0 &&
           cells_per_dim > 2)
        cells_per_dim >>= 1;

    std::vector<Interval> cell = box;
    std::optional<Interval> acc;
    std::vector<int> idx(active.size(), 0);
    for (;;) {
        for (size_t k = 0; k < active.size(); ++k) {
            const Interval& whole = box[static_cast<size_t>(active[k])];
            double w = (whole.hi - whole.lo) / cells_per_dim;
            double lo = whole.lo + w * idx[k];
            double hi = (idx[k] == cells_per_dim - 1) ? whole.hi : whole.lo + w * (idx[k] + 1);
            cell[static_cast<size_t>(active[k])] = Interval(lo, hi);
        }
        Interval v = eval_cell(f, cell);
        acc = acc ? Interval::hull(*acc, v) : v;
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == cells_per_dim) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return *acc;
}

} // namespace

Interval interval_eval(const RatFunc& f, const Box& box, int depth) {
    return eval_subdivided(f, box.intervals(), depth);
}

Rat sup_abs(const RatFunc& f, const Box& box, int depth) {
    if (f.num.is_zero()) return Rat(0);
    Interval r = interval_eval(f, box, depth);
    return rat_of_double(r.mag());
}

// ---- tree-level interval derivatives at e = d = 0 ---------------------------
// Evaluating df/dy_i directly on the tree keeps divisions structured (the
// denominator interval is the subtree's own enclosure), which expanded
// rational-function forms lose.

namespace {

struct ZeroDerivInterval {
    const std::vector<Interval>& x;
    int i;
    bool wrt_e;

    struct V {
        Interval v, d;
    };
    std::unordered_map<const FNode*, V> memo;

    const V& eval(const FPtr& n) {
        auto it = memo.find(n.get());
        if (it != memo.end()) return it->second;
        V r{Interval(0.0), Interval(0.0)};
        switch (n->op) {
            case Expr::Op::Var: r.v = x[static_cast<size_t>(n->var)]; break;
            case Expr::Op::Const: r.v = interval_of_rat(n->value); break;
            default: {
                const V& a = eval(n->a);
                const V& b = eval(n->b);
                switch (n->op) {
                    case Expr::Op::Add:
                        r.v = a.v + b.v;
                        r.d = a.d + b.d;
                        break;
                    case Expr::Op::Sub:
                        r.v = a.v - b.v;
                        r.d = a.d - b.d;
                        break;
                    case Expr::Op::Mul:
                        r.v = a.v * b.v;
                        r.d = a.d * b.v + a.v * b.d;
                        break;
                    case Expr::Op::Div:
                        r.v = a.v / b.v;
                        r.d = (a.d - r.v * b.d) / b.v;
                        break;
                    default: break;
                }
                if (n->err == i) {
                    if (wrt_e)
                        r.d = r.d + r.v;  // value at e=d=0 equals the inner value
                    else
                        r.d = r.d + Interval(1.0);
                }
            }
        }
        return memo.emplace(n.get(), r).first->second;
    }
};

void tree_vars(const FPtr& n, std::set<int>& vs) {
    if (n->op == Expr::Op::Var) {
        vs.insert(n->var);
        return;
    }
    if (n->op == Expr::Op::Const) return;
    tree_vars(n->a, vs);
    tree_vars(n->b, vs);
}

// sup over the box (uniform subdivision of the active dims) of |d coord/d y_i|.
double sup_abs_tree_deriv(const FPtr& coord, int i, bool wrt_e, const std::vector<Interval>& box,
                          int depth) {
    std::set<int> av;
    tree_vars(coord, av);
    std::vector<int> active(av.begin(), av.end());
    int cells_per_dim = depth <= 0 || active.empty() ? 1 : (1 << depth);
    while (active.size() > 1 && std::pow(static_cast<double>(cells_per_dim), active.size()) > 4096.0 &&
           cells_per_dim > 2)
        cells_per_dim >>= 1;

    std::vector<Interval> cell = box;
    std::vector<int> idx(active.size(), 0);
    double best = 0;
    for (;;) {
        for (size_t k = 0; k < active.size(); ++k) {
            const Interval& whole = box[static_cast<size_t>(active[k])];
            double w = (whole.hi - whole.lo) / cells_per_dim;
            double lo = whole.lo + w * idx[k];
            double hi = (idx[k] == cells_per_dim - 1) ? whole.hi : whole.lo + w * (idx[k] + 1);
            cell[static_cast<size_t>(active[k])] = Interval(lo, hi);
        }
        ZeroDerivInterval zd{cell, i, wrt_e, {}};
        best = std::max(best, zd.eval(coord).d.mag());
        if (active.empty()) break;
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == cells_per_dim) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return best;
}

} // namespace

double sup_abs_error_derivative(const FPtr& coord, int err, bool wrt_e, const Box& box, int depth) {
    return sup_abs_tree_deriv(coord, err, wrt_e, box.intervals(), depth);
}

// ---- second-order remainder -------------------------------------------------

namespace {

// Interval evaluation of values and first/second derivatives w.r.t. two
// error variables at perturbed points (|e| <= eps, |d| <= delta).
struct PerturbedHessian {
    const std::vector<Interval>& x;
    Interval e_range, d_range;
    int i, k;  // error pair ids under differentiation: y_i, y_k
    bool i_is_e, k_is_e;

    struct V {
        Interval v, di, dk, dik;
    };
    std::unordered_map<const FNode*, V> memo;

    const V& eval(const FPtr& n) {
        auto it = memo.find(n.get());
        if (it != memo.end()) return it->second;
        V r{Interval(0.0), Interval(0.0), Interval(0.0), Interval(0.0)};
        switch (n->op) {
            case Expr::Op::Var: r.v = x[static_cast<size_t>(n->var)]; break;
            case Expr::Op::Const: r.v = interval_of_rat(n->value); break;
            default: {
                const V& a = eval(n->a);
                const V& b = eval(n->b);
                V inner;
                switch (n->op) {
                    case Expr::Op::Add:
                        inner.v = a.v + b.v;
                        inner.di = a.di + b.di;
                        inner.dk = a.dk + b.dk;
                        inner.dik = a.dik + b.dik;
                        break;
                    case Expr::Op::Sub:
                        inner.v = a.v - b.v;
                        inner.di = a.di - b.di;
                        inner.dk = a.dk - b.dk;
                        inner.dik = a.dik - b.dik;
                        break;
                    case Expr::Op::Mul:
                        inner.v = a.v * b.v;
                        inner.di = a.di * b.v + a.v * b.di;
                        inner.dk = a.dk * b.v + a.v * b.dk;
                        inner.dik = a.dik * b.v + a.di * b.dk + a.dk * b.di + a.v * b.dik;
                        break;
                    case Expr::Op::Div: {
                        // u = a/b and derivatives via u' = (a' - u b')/b
                        Interval u = a.v / b.v;
                        Interval ui = (a.di - u * b.di) / b.v;
                        Interval uk = (a.dk - u * b.dk) / b.v;
                        Interval uik = (a.dik - ui * b.dk - uk * b.di - u * b.dik) / b.v;
                        inner.v = u;
                        inner.di = ui;
                        inner.dk = uk;
                        inner.dik = uik;
                        break;
                    }
                    default: break;
                }
                if (n->err >= 0) {
                    Interval one_e = Interval(1.0) + e_range;
                    r.v = inner.v * one_e + d_range;
                    r.di = inner.di * one_e;
                    r.dk = inner.dk * one_e;
                    r.dik = inner.dik * one_e;
                    if (i_is_e && n->err == i) {
                        r.di = r.di + inner.v;
                        r.dik = r.dik + inner.dk;
                    }
                    if (k_is_e && n->err == k) {
                        r.dk = r.dk + inner.v;
                        r.dik = r.dik + inner.di;
                    }
                    if (!i_is_e && n->err == i) r.di = r.di + Interval(1.0);
                    if (!k_is_e && n->err == k) r.dk = r.dk + Interval(1.0);
                } else {
                    r = inner;
                }
            }
        }
        return memo.emplace(n.get(), r).first->second;
    }
};

} // namespace

Rat second_order_bound(const FPtr& coord, int n_err, const Box& box, const FloatFormat& fmt) {
    if (n_err == 0) return Rat(0);
    std::vector<Interval> xiv = box.intervals();
    double eps_d = rat_to_double(fmt.eps), delta_d = rat_to_double(fmt.delta);
    Interval er(-eps_d, eps_d), dr(-delta_d, delta_d);

    std::unordered_map<const FNode*, bool> memo_presence;
    auto present = [&](int i) {
        memo_presence.clear();
        return tree_has_err(coord, i, memo_presence);
    };
    std::vector<bool> has(static_cast<size_t>(n_err));
    for (int i = 0; i < n_err; ++i) has[static_cast<size_t>(i)] = present(i);

    // y ranges over e_0..e_{k-1}, d_0..d_{k-1}. d-d second derivatives vanish;
    // mixed e-d and e-e pairs are evaluated with interval arithmetic.
    double total = 0;
    auto add_pair = [&](int i, bool i_is_e, int k, bool k_is_e, double wi, double wk, bool diagonal) {
        PerturbedHessian h{xiv, er, dr, i, k, i_is_e, k_is_e, {}};
        double m = h.eval(coord).dik.mag();
        // off-diagonal pairs appear twice in the Hessian sum
        total += (diagonal ? 1.0 : 2.0) * m * wi * wk;
    };
    for (int i = 0; i < n_err; ++i) {
        if (!has[static_cast<size_t>(i)]) continue;
        for (int k = i; k < n_err; ++k) {
            if (!has[static_cast<size_t>(k)]) continue;
            add_pair(i, true, k, true, eps_d, eps_d, i == k);  // e_i, e_k
            add_pair(i, true, k, false, eps_d, delta_d, false);  // e_i, d_k
            if (i != k) add_pair(k, true, i, false, eps_d, delta_d, false);  // e_k, d_i
        }
    }
    return rat_of_double(detail::up(0.5 * total));
}

ConstBound const_error_bound(const AbstractedFunction& f, const Box& box, const FloatFormat& fmt,
                             int depth) {
    ConstBound out;
    for (auto& coord : f.coords) {
        std::unordered_map<const FNode*, bool> memo;
        bool any = false;
        for (int i = 0; i < f.n_err && !any; ++i) {
            memo.clear();
            any = tree_has_err(coord, i, memo);
        }
        if (!any) {
            out.gamma.push_back(Rat(0));
            continue;
        }
        std::vector<Interval> biv = box.intervals();
        double first = 0;
        double eps_d = detail::up(rat_to_double(fmt.eps)), delta_d = detail::up(rat_to_double(fmt.delta));
        auto add_up = [&first](double t) { first = detail::up(first + detail::up(t)); };
        for (int i = 0; i < f.n_err; ++i) {
            memo.clear();
            if (!tree_has_err(coord, i, memo)) continue;
            add_up(sup_abs_tree_deriv(coord, i, true, biv, depth) * eps_d);
            add_up(sup_abs_tree_deriv(coord, i, false, biv, depth) * delta_d);
        }
        Rat g = rat_of_double(first);
        g += second_order_bound(coord, f.n_err, box, fmt);
        // round up to a 2^-64 grid so downstream exact arithmetic stays light
        out.gamma.push_back(rat_ceil_dyadic(g, 64));
    }
    return out;
}

// ---- symbolic bounds ---------------------------------------------------------

SymBound symbolic_error_bound(const AbstractedFunction& f, const FloatFormat& fmt,
                              const std::map<int, int>& absmap) {
    SymBound out;
    for (auto& coord : f.coords) {
        Partials p = partials_at_zero(coord, f.n_err);
        Poly g;
        for (int i = 0; i < f.n_err; ++i) {
            const RatFunc& de = p.de[static_cast<size_t>(i)];
            const RatFunc& dd = p.dd[static_cast<size_t>(i)];
            if (!de.is_poly() || !dd.is_poly())
                throw std::domain_error("symbolic error bound requires a division-free update");
            g = g + de.as_poly().abs_image(absmap) * fmt.eps;
            g = g + dd.as_poly().abs_image(absmap) * fmt.delta;
        }
        g = g + second_order_bound_symbolic(coord, f.n_err, fmt, absmap);
        out.gamma.push_back(g);
    }
    return out;
}

namespace {

// f-hat as an exact polynomial over (program vars, e vars, d vars), with
// e_i at var id base+2i and d_i at base+2i+1. Division-free trees only.
Poly tree_to_poly_with_errs(const FPtr& n, int base) {
    switch (n->op) {
        case Expr::Op::Var: return Poly::variable(n->var);
        case Expr::Op::Const: return Poly(n->value);
        default: {
            Poly a = tree_to_poly_with_errs(n->a, base);
            Poly b = tree_to_poly_with_errs(n->b, base);
            Poly inner;
            switch (n->op) {
                case Expr::Op::Add: inner = a + b; break;
                case Expr::Op::Sub: inner = a - b; break;
                case Expr::Op::Mul: inner = a * b; break;
                case Expr::Op::Div: throw std::domain_error("division in symbolic remainder");
                default: break;
            }
            if (n->err >= 0) {
                Poly e = Poly::variable(base + 2 * n->err);
                Poly d = Poly::variable(base + 2 * n->err + 1);
                inner = inner * (Poly(Rat(1)) + e) + d;
            }
            return inner;
        }
    }
}

} // namespace

Poly second_order_bound_symbolic(const FPtr& coord, int n_err, const FloatFormat& fmt,
                                 const std::map<int, int>& absmap) {
    if (n_err == 0) return Poly();
    // Base id above all program/abs variable ids in play.
    int base = 0;
    for (auto& [v, av] : absmap) base = std::max(base, std::max(v, av) + 1);
    Poly full = tree_to_poly_with_errs(coord, base);

    // R2 = 1/2 sum_{i,j} d2f/dyidyj (x, e', d') y_i y_j; the triangle pass
    // replaces each |y| by its maximum error and each program monomial by
    // its absolute image.
    Poly bound;
    for (int i = 0; i < 2 * n_err; ++i) {
        Poly di = full.derivative(base + i);
        if (di.is_zero()) continue;
        Rat wi = (i % 2 == 0) ? fmt.eps : fmt.delta;
        for (int j = i; j < 2 * n_err; ++j) {
            Poly dij = di.derivative(base + j);
            if (dij.is_zero()) continue;
            Rat wj = (j % 2 == 0) ? fmt.eps : fmt.delta;
            // |d2| with every e/d monomial replaced by its bound
            Poly absd;
            for (auto& [m, c] : dij.terms()) {
                Monomial pm;
                Rat scale = rat_abs(c);
                for (auto& [v, e] : m.f) {
                    if (v >= base) {
                        Rat w = ((v - base) % 2 == 0) ? fmt.eps : fmt.delta;
                        for (int t = 0; t < e; ++t) scale *= w;
                    } else {
                        auto it = absmap.find(v);
                        pm = pm * Monomial::var(it == absmap.end() ? v : it->second, e);
                    }
                }
                absd.add_term(pm, scale);
            }
            Rat mult = (i == j) ? Rat(1, 2) : Rat(1);
            bound = bound + absd * (mult * wi * wj);
        }
    }
    return bound;
}

Poly evenize_abs_poly(const Poly& p) {
    Poly cur = p;
    for (;;) {
        bool changed = false;
        Poly next;
        for (auto& [m, c] : cur.terms()) {
            int odd_var = -1, odd_exp = 0;
            for (auto& [v, e] : m.f)
                if (e % 2 == 1) {
                    odd_var = v;
                    odd_exp = e;
                    break;
                }
            if (odd_var < 0) {
                next.add_term(m, c);
                continue;
            }
            changed = true;
            Monomial rest;
            for (auto& [v, e] : m.f)
                if (v != odd_var) rest = rest * Monomial::var(v, e);
            next.add_term(rest * Monomial::var(odd_var, odd_exp - 1), c / 2);
            next.add_term(rest * Monomial::var(odd_var, odd_exp + 1), c / 2);
        }
        cur = std::move(next);
        if (!changed) return cur;
    }
}

double eval_sampled(const FPtr& n, const std::vector<double>& x, const std::vector<double>& e,
                    const std::vector<double>& d) {
    double v = 0;
    switch (n->op) {
        case Expr::Op::Var: return x[static_cast<size_t>(n->var)];
        case Expr::Op::Const: return rat_to_double(n->value);
        case Expr::Op::Add: v = eval_sampled(n->a, x, e, d) + eval_sampled(n->b, x, e, d); break;
        case Expr::Op::Sub: v = eval_sampled(n->a, x, e, d) - eval_sampled(n->b, x, e, d); break;
        case Expr::Op::Mul: v = eval_sampled(n->a, x, e, d) * eval_sampled(n->b, x, e, d); break;
        case Expr::Op::Div: v = eval_sampled(n->a, x, e, d) / eval_sampled(n->b, x, e, d); break;
    }
    if (n->err >= 0) v = v * (1.0 + e[static_cast<size_t>(n->err)]) + d[static_cast<size_t>(n->err)];
    return v;
}

std::string attribution_dump(const AbstractedFunction& f, const Box& box, const FloatFormat& fmt,
                             const VarTable& vars) {
    std::ostringstream os;
    for (size_t c = 0; c < f.coords.size(); ++c) {
        Partials p = partials_at_zero(f.coords[c], f.n_err);
        os << "coord " << c << ":\n";
        for (int i = 0; i < f.n_err; ++i) {
            Rat se = sup_abs(p.de[static_cast<size_t>(i)], box, 2);
            if (se == 0) continue;
            os << "  e" << i << " (" << f.sites[static_cast<size_t>(i)]
               << "): sup|df/de| = " << rat_to_double(se) * 1.0
               << ", contribution " << rat_to_double(se * fmt.eps) << "\n";
        }
    }
    (void)vars;
    return os.str();
}

} // namespace fpinv::fp
