#include "fpinv/coarse.hpp"

#include <cmath>
#include <random>

namespace fpinv::coarse {

using lang::Expr;
using lang::ExprPtr;
using lang::Kind;

void CoarseInvariant::enlarge(const Rat& factor) {
    for (auto& r : ranges) {
        if (r.verified) continue;
        Rat c = (r.lo + r.hi) / 2, h = (r.hi - r.lo) / 2;
        r.lo = c - h * factor;
        r.hi = c + h * factor;
    }
}

namespace {

// Bounds extractable from a linear single-variable atom poly >= 0.
struct VarBound {
    int var;
    bool is_lower;
    Rat bound;
};

std::optional<VarBound> atom_bound(const Poly& h) {
    auto vs = h.vars_used();
    if (vs.size() != 1 || h.degree() != 1) return std::nullopt;
    int v = vs[0];
    Rat a = h.coeff(Monomial::var(v)), b = h.constant_term();
    if (a == 0) return std::nullopt;
    // a*v + b >= 0
    if (a > 0) return VarBound{v, true, Rat(-b / a)};
    return VarBound{v, false, Rat(-b / a)};
}

} // namespace

fp::Box init_box(const cfg::FpCfg& g) {
    int n = g.vars.size();
    std::vector<std::optional<Rat>> lo(static_cast<size_t>(n)), hi(static_cast<size_t>(n));
    for (auto& a : g.init) {
        auto vb = atom_bound(a.poly);
        if (!vb) continue;
        auto& slot = vb->is_lower ? lo[static_cast<size_t>(vb->var)] : hi[static_cast<size_t>(vb->var)];
        if (vb->is_lower)
            slot = slot ? std::max(*slot, vb->bound) : vb->bound;
        else
            slot = slot ? std::min(*slot, vb->bound) : vb->bound;
    }
    fp::Box b(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        if (!lo[static_cast<size_t>(v)] || !hi[static_cast<size_t>(v)])
            throw CoarseError("precondition does not bound variable '" + g.vars.name(v) + "'");
        b.iv[static_cast<size_t>(v)] = {*lo[static_cast<size_t>(v)], *hi[static_cast<size_t>(v)]};
        if (b.iv[static_cast<size_t>(v)].first > b.iv[static_cast<size_t>(v)].second)
            throw CoarseError("empty precondition range for '" + g.vars.name(v) + "'");
    }
    return b;
}

CoarseInvariant from_declared(const cfg::FpCfg& g) {
    fp::Box ib = init_box(g);
    CoarseInvariant ci;
    ci.provenance = Provenance::Declared;
    ci.ranges.resize(static_cast<size_t>(g.vars.size()));
    std::vector<bool> have(static_cast<size_t>(g.vars.size()), false);
    for (auto& ch : g.coarse_hints) {
        ci.ranges[static_cast<size_t>(ch.var)] = VarRange{ch.lo, ch.hi, false};
        have[static_cast<size_t>(ch.var)] = true;
    }
    for (int v = 0; v < g.vars.size(); ++v) {
        if (have[static_cast<size_t>(v)]) continue;
        if (g.written(v)) throw CoarseError("#coarse pragma misses written variable '" + g.vars.name(v) + "'");
        // unchanged variables keep their precondition range, which is invariant
        ci.ranges[static_cast<size_t>(v)] = VarRange{ib.iv[static_cast<size_t>(v)].first,
                                                     ib.iv[static_cast<size_t>(v)].second, true};
    }
    return ci;
}

// ---- interval iteration -----------------------------------------------------

namespace {

struct IterTransition {
    const cfg::Transition* tr;
    std::vector<RatFunc> exact;
    fp::AbstractedFunction absf;
};

// [lo,hi] clipped by the guard's single-variable linear atoms (exact for
// integer atoms; float atoms are used unrelaxed, which only shrinks the
// region the image is computed over and is compensated by the hull with the
// previous box).
fp::Box guard_clip(const fp::Box& b, const cfg::GuardConj& guard, bool& empty) {
    fp::Box out = b;
    empty = false;
    for (auto& a : guard) {
        Poly h = lang::expr_to_poly(a.a2) - lang::expr_to_poly(a.a1);
        if (a.int_kind && a.strict) h = h - Poly(Rat(1));
        auto vb = atom_bound(h);
        if (!vb) continue;
        auto& iv = out.iv[static_cast<size_t>(vb->var)];
        if (vb->is_lower)
            iv.first = std::max(iv.first, vb->bound);
        else
            iv.second = std::min(iv.second, vb->bound);
        if (iv.first > iv.second) {
            empty = true;
            return out;
        }
    }
    return out;
}

// i' = i + c pattern for integer counters.
std::optional<Rat> counter_step(const RatFunc& f, int v) {
    if (!f.is_poly()) return std::nullopt;
    Poly d = f.as_poly() - Poly::variable(v);
    if (d.is_constant()) return d.constant_term();
    return std::nullopt;
}

} // namespace

CoarseInvariant from_interval_iteration(const cfg::FpCfg& g, const fp::FloatFormat& fmt, long k,
                                        int depth) {
    fp::Box box = init_box(g);
    int n = g.vars.size();

    std::vector<IterTransition> trans;
    for (auto& t : g.transitions) {
        if (t.src != g.initial || t.tgt != g.initial) continue;
        IterTransition it;
        it.tr = &t;
        for (auto& u : t.update) it.exact.push_back(cfg::expr_to_ratfunc(u));
        it.absf = fp::abstract_update(t.update);
        trans.push_back(std::move(it));
    }
    if (trans.empty()) {
        // no loop at the initial location: the precondition box is already
        // the reachable set there
        CoarseInvariant ci;
        ci.provenance = Provenance::IntervalIterated;
        for (int v = 0; v < n; ++v)
            ci.ranges.push_back(VarRange{box.iv[static_cast<size_t>(v)].first,
                                         box.iv[static_cast<size_t>(v)].second, true});
        return ci;
    }

    if (k < 0) k = g.iterations;
    if (k < 0) {
        // derive from an integer counter bounded by its guard
        for (auto& it : trans) {
            for (auto& a : it.tr->guard) {
                if (!a.int_kind) continue;
                Poly h = lang::expr_to_poly(a.a2) - lang::expr_to_poly(a.a1);
                if (a.strict) h = h - Poly(Rat(1));
                auto vb = atom_bound(h);
                if (!vb) continue;
                auto step = counter_step(it.exact[static_cast<size_t>(vb->var)], vb->var);
                if (!step || *step == 0) continue;
                if ((vb->is_lower && *step < 0) || (!vb->is_lower && *step > 0)) {
                    Rat start = vb->is_lower ? box.iv[static_cast<size_t>(vb->var)].second
                                             : box.iv[static_cast<size_t>(vb->var)].first;
                    Rat span = vb->is_lower ? start - vb->bound : vb->bound - start;
                    Rat steps = span / rat_abs(*step) + 2;
                    k = static_cast<long>(rat_to_double(steps)) + 1;
                }
            }
        }
    }
    if (k < 0) throw CoarseError("loop has no derivable iteration bound; interval iteration unavailable");

    const long max_plain_steps = 200000;
    long budget = std::min(k, max_plain_steps);
    bool fixpoint = false;
    for (long step = 0; step < budget && !fixpoint; ++step) {
        fp::Box next = box;
        bool grew = false;
        for (auto& it : trans) {
            bool empty = false;
            fp::Box src = guard_clip(box, it.tr->guard, empty);
            if (empty) continue;
            for (int v = 0; v < n; ++v) {
                Interval img;
                try {
                    img = fp::interval_eval(it.exact[static_cast<size_t>(v)], src, depth);
                } catch (const std::domain_error&) {
                    throw CoarseError("interval iteration lost a denominator sign; box diverged");
                }
                // rounding slack for this coordinate over the clipped box
                Rat gamma(0);
                try {
                    double first = 0;
                    double eps_d = rat_to_double(fmt.eps) * (1 + 1e-9);
                    double delta_d = rat_to_double(fmt.delta) * (1 + 1e-9);
                    const auto& coord = it.absf.coords[static_cast<size_t>(v)];
                    auto up1 = [](double t) { return std::nextafter(t, 1e308); };
                    for (int e = 0; e < it.absf.n_err; ++e) {
                        first = up1(first + up1(fp::sup_abs_error_derivative(coord, e, true, src, 0) * eps_d));
                        first = up1(first + up1(fp::sup_abs_error_derivative(coord, e, false, src, 0) * delta_d));
                    }
                    if (first != 0) {
                        gamma = rat_of_double(first);
                        gamma += fp::second_order_bound(coord, it.absf.n_err, src, fmt);
                    }
                } catch (const std::domain_error&) {
                    throw CoarseError("interval iteration lost a denominator sign; box diverged");
                }
                Rat lo = rat_of_double(img.lo) - gamma, hi = rat_of_double(img.hi) + gamma;
                // accelerate integer counters straight to their guard bound
                if (g.kinds[static_cast<size_t>(v)] == Kind::Int) {
                    auto stepc = counter_step(it.exact[static_cast<size_t>(v)], v);
                    if (stepc && *stepc != 0) {
                        bool found = false;
                        for (auto& a : it.tr->guard) {
                            if (!a.int_kind) continue;
                            Poly h = lang::expr_to_poly(a.a2) - lang::expr_to_poly(a.a1);
                            if (a.strict) h = h - Poly(Rat(1));
                            auto vb = atom_bound(h);
                            if (!vb || vb->var != v) continue;
                            if (*stepc > 0 && !vb->is_lower) {
                                hi = vb->bound + *stepc;
                                found = true;
                            } else if (*stepc < 0 && vb->is_lower) {
                                lo = vb->bound + *stepc;
                                found = true;
                            }
                        }
                        (void)found;
                    }
                }
                auto& iv = next.iv[static_cast<size_t>(v)];
                if (lo < iv.first) {
                    iv.first = lo;
                    grew = true;
                }
                if (hi > iv.second) {
                    iv.second = hi;
                    grew = true;
                }
            }
        }
        box = next;
        if (!grew) fixpoint = true;
    }
    if (!fixpoint && k > budget)
        throw CoarseError("interval iteration did not stabilize within the step budget");

    CoarseInvariant ci;
    ci.provenance = Provenance::IntervalIterated;
    for (int v = 0; v < n; ++v)
        ci.ranges.push_back(
            VarRange{box.iv[static_cast<size_t>(v)].first, box.iv[static_cast<size_t>(v)].second, true});
    return ci;
}

// ---- data-driven sampling ----------------------------------------------------

namespace {

struct FloatInterp {
    const lang::SourceProgram& p;
    bool single;  // float32 operation rounding
    std::vector<double> env;
    long iter_budget;
    std::function<void(const std::vector<double>&)> on_head;

    double round_op(double v) const { return single ? static_cast<double>(static_cast<float>(v)) : v; }

    double eval(const ExprPtr& e) {
        double v = 0;
        switch (e->op) {
            case Expr::Op::Var: return env[static_cast<size_t>(e->var)];
            case Expr::Op::Const: return rat_to_double(e->value);
            case Expr::Op::Add: v = eval(e->a) + eval(e->b); break;
            case Expr::Op::Sub: v = eval(e->a) - eval(e->b); break;
            case Expr::Op::Mul: v = eval(e->a) * eval(e->b); break;
            case Expr::Op::Div: v = eval(e->a) / eval(e->b); break;
        }
        if (e->rounds) v = round_op(v);
        if (!std::isfinite(v) || std::fabs(v) > 1e300) throw CoarseError("numeric overflow during simulation");
        return v;
    }

    bool test(const lang::CondPtr& c) {
        switch (c->tag) {
            case lang::Cond::Tag::Atom: {
                double a = eval(c->a1), b = eval(c->a2);
                return c->strict ? a < b : a <= b;
            }
            case lang::Cond::Tag::And: return test(c->c1) && test(c->c2);
            case lang::Cond::Tag::Or: return test(c->c1) || test(c->c2);
            case lang::Cond::Tag::Not: return !test(c->c1);
        }
        return false;
    }

    // returns false when the iteration budget ran out
    bool run(const std::vector<lang::StmtPtr>& body, int depth) {
        for (auto& s : body) {
            switch (s->tag) {
                case lang::Stmt::Tag::Assign: env[static_cast<size_t>(s->var)] = eval(s->rhs); break;
                case lang::Stmt::Tag::If:
                    if (!run(test(s->cond) ? s->then_body : s->else_body, depth + 1)) return false;
                    break;
                case lang::Stmt::Tag::While:
                    for (;;) {
                        if (depth == 0) on_head(env);
                        if (iter_budget-- <= 0) return false;
                        if (!test(s->cond)) break;
                        if (!run(s->body, depth + 1)) return false;
                    }
                    break;
            }
        }
        return true;
    }
};

Rat grid_floor(const Rat& x) {
    Rat x10 = x * 10;
    mpz_class n = x10.get_num() / x10.get_den();
    if (Rat(n) > x10) n -= 1;  // floor for negatives
    return Rat(n) / 10;
}
Rat grid_ceil(const Rat& x) { return -grid_floor(-x); }

} // namespace

CoarseInvariant data_driven(const lang::SourceProgram& p, const cfg::FpCfg& g,
                            const fp::FloatFormat& fmt, int n_inputs, long n_iters, double pad,
                            uint64_t seed) {
    fp::Box ib = init_box(g);
    int n = g.vars.size();

    // CFG variables by name in the source program
    std::vector<int> src_var(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) src_var[static_cast<size_t>(v)] = p.vars.find(g.vars.name(v));

    auto init_atoms = lang::init_atoms(p);

    std::vector<std::optional<std::pair<double, double>>> hull(static_cast<size_t>(n));
    auto record = [&](const std::vector<double>& env) {
        for (int v = 0; v < n; ++v) {
            double val = env[static_cast<size_t>(src_var[static_cast<size_t>(v)])];
            auto& h = hull[static_cast<size_t>(v)];
            if (!h)
                h = {val, val};
            else
                h = {std::min(h->first, val), std::max(h->second, val)};
        }
    };

    for (int input = 0; input < n_inputs; ++input) {
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(input + 1)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::vector<double> env(static_cast<size_t>(p.vars.size()), 0.0);
        bool ok = false;
        for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
            for (int v = 0; v < n; ++v) {
                double lo = rat_to_double(ib.iv[static_cast<size_t>(v)].first);
                double hi = rat_to_double(ib.iv[static_cast<size_t>(v)].second);
                double val = lo + (hi - lo) * uni(rng);
                if (g.kinds[static_cast<size_t>(v)] == Kind::Int) val = std::floor(val + 0.5);
                env[static_cast<size_t>(src_var[static_cast<size_t>(v)])] = val;
            }
            ok = true;
            for (auto& a : init_atoms) {
                std::vector<double> point(static_cast<size_t>(p.vars.size()), 0.0);
                for (size_t j = 0; j < point.size(); ++j) point[j] = env[j];
                if (a.poly.eval_d(point) < -1e-12) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) throw CoarseError("could not sample a precondition-satisfying input");

        FloatInterp interp{p, fmt.name == "f32", env, n_iters, record};
        record(env);
        interp.run(p.body, 0);  // budget exhaustion just stops the run
        record(interp.env);
    }

    CoarseInvariant ci;
    ci.provenance = Provenance::DataDriven;
    ci.ranges.resize(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        if (!g.written(v)) {
            // unchanged: the precondition range is itself invariant
            ci.ranges[static_cast<size_t>(v)] = VarRange{ib.iv[static_cast<size_t>(v)].first,
                                                         ib.iv[static_cast<size_t>(v)].second, true};
            continue;
        }
        auto& h = hull[static_cast<size_t>(v)];
        if (!h) throw CoarseError("no samples recorded for '" + g.vars.name(v) + "'");
        Rat lo = rat_of_double(h->first), hi = rat_of_double(h->second);
        if (pad > 0) {
            Rat f = Rat(1) + rat_of_double(pad);
            lo = lo >= 0 ? grid_floor(lo / f) : -grid_ceil(-lo * f);
            hi = hi >= 0 ? grid_ceil(hi * f) : -grid_floor(-hi / f);
        }
        ci.ranges[static_cast<size_t>(v)] = VarRange{lo, hi, false};
    }
    return ci;
}

} // namespace fpinv::coarse
