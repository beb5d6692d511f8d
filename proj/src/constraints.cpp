#include "fpinv/constraints.hpp"

#include <sstream>

namespace fpinv::cons {

AffForm& AffForm::operator+=(const AffForm& o) {
    k += o.k;
    for (auto& [id, c] : o.lin) {
        auto [it, fresh] = lin.emplace(id, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) lin.erase(it);
        }
    }
    return *this;
}

AffForm AffForm::operator*(const Rat& c) const {
    AffForm r;
    if (c == 0) return r;
    r.k = k * c;
    for (auto& [id, v] : lin) r.lin[id] = v * c;
    return r;
}

Rat AffForm::eval_exact(const std::vector<Rat>& assign) const {
    Rat v = k;
    for (auto& [id, c] : lin) v += c * assign.at(static_cast<size_t>(id));
    return v;
}

double AffForm::eval(const std::vector<Rat>& assign) const { return rat_to_double(eval_exact(assign)); }

std::string AffForm::str(const Registry& reg) const {
    std::ostringstream os;
    bool first = true;
    if (k != 0 || lin.empty()) {
        os << rat_str(k);
        first = false;
    }
    for (auto& [id, c] : lin) {
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0)
            os << "-";
        first = false;
        Rat a = rat_abs(c);
        if (a != 1) os << rat_str(a) << "*";
        os << reg.name(id);
    }
    return os.str();
}

LinPoly linpoly_add(const LinPoly& a, const LinPoly& b) {
    LinPoly r = a;
    for (auto& [m, f] : b) {
        r[m] += f;
        if (r[m].is_zero()) r.erase(m);
    }
    return r;
}

LinPoly linpoly_scale(const LinPoly& a, const Rat& c) {
    LinPoly r;
    if (c == 0) return r;
    for (auto& [m, f] : a) r[m] = f * c;
    return r;
}

Poly linpoly_instantiate(const LinPoly& p, const std::vector<Rat>& assign) {
    Poly out;
    for (auto& [m, f] : p) out.add_term(m, f.eval_exact(assign));
    return out;
}

std::vector<Monomial> monomial_basis(int nvars, int degree) {
    std::vector<Monomial> out;
    std::function<void(int, int, Monomial)> rec = [&](int v, int left, Monomial m) {
        if (v == nvars) {
            out.push_back(m);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            Monomial m2 = m;
            if (e > 0) m2 = m2 * Monomial::var(v, e);
            rec(v + 1, left - e, m2);
        }
    };
    rec(0, degree, Monomial::one());
    std::sort(out.begin(), out.end());
    return out;
}

Template make_template(int nvars, int degree, const std::vector<int>& locations, Registry& reg) {
    Template t;
    t.degree = degree;
    t.basis = monomial_basis(nvars, degree);
    int max_loc = 0;
    for (int l : locations) max_loc = std::max(max_loc, l);
    t.coeff_ids.resize(static_cast<size_t>(max_loc) + 1);
    for (int l : locations) {
        auto& ids = t.coeff_ids[static_cast<size_t>(l)];
        for (size_t i = 0; i < t.basis.size(); ++i)
            ids.push_back(reg.add("c_l" + std::to_string(l) + "_" + std::to_string(i), false));
    }
    return t;
}

LinPoly Template::instantiate(int loc, const std::vector<Poly>& args) const {
    const auto& ids = coeff_ids.at(static_cast<size_t>(loc));
    LinPoly out;
    for (size_t i = 0; i < basis.size(); ++i) {
        // expand q_i(args)
        Poly q = Poly(Rat(1));
        for (auto& [v, e] : basis[i].f) q = q * args.at(static_cast<size_t>(v)).pow(static_cast<unsigned>(e));
        for (auto& [m, c] : q.terms()) {
            out[m] += AffForm::unknown(ids[i], c);
            if (out[m].is_zero()) out.erase(m);
        }
    }
    return out;
}

LinPoly Template::instantiate_identity(int loc, int nvars) const {
    std::vector<Poly> args;
    for (int v = 0; v < nvars; ++v) args.push_back(Poly::variable(v));
    return instantiate(loc, args);
}

Poly Template::solved(int loc, const std::vector<Rat>& assign) const {
    const auto& ids = coeff_ids.at(static_cast<size_t>(loc));
    Poly out;
    for (size_t i = 0; i < basis.size(); ++i)
        out.add_term(basis[i], assign.at(static_cast<size_t>(ids[i])));
    return out;
}

void SolveConfig::validate() const {
    if (!(bar > 0)) throw std::invalid_argument("barrier constant must be positive");
    if (!(a > 0)) throw std::invalid_argument("relaxation constant must be positive");
    if (m < 1) throw std::invalid_argument("handelman multiplicand bound must be >= 1");
    if (degree < 1) throw std::invalid_argument("template degree must be >= 1");
}

// Quantified-variable convention per constraint: ids [0,n) program vars,
// [n,2n) primed, [2n,3n) deviation r, [3n,4n) absolute values.
namespace {

VarTable make_qvars(const VarTable& xvars) {
    VarTable q;
    int n = xvars.size();
    for (int v = 0; v < n; ++v) q.intern(xvars.name(v));
    for (int v = 0; v < n; ++v) q.intern(xvars.name(v) + "'");
    for (int v = 0; v < n; ++v) q.intern("r_" + xvars.name(v));
    for (int v = 0; v < n; ++v) q.intern(xvars.name(v) + "_abs");
    return q;
}

void add_abs_atoms(std::vector<Poly>& premises, const std::vector<Poly>& gammas, int n) {
    std::set<int> abs_vars;
    for (auto& g : gammas)
        for (int v : g.vars_used())
            if (v >= 3 * n) abs_vars.insert(v);
    for (int av : abs_vars) {
        int v = av - 3 * n;
        Poly x = Poly::variable(v), xa = Poly::variable(av);
        premises.push_back(xa);                  // x_abs >= 0
        premises.push_back(xa * xa - x * x);     // x_abs^2 - x^2 >= 0
        premises.push_back(x * x - xa * xa);     // x^2 - x_abs^2 >= 0
        premises.push_back(xa - x);              // implied: x_abs >= x
        premises.push_back(xa + x);              // implied: x_abs >= -x
    }
}

void dedup_premises(std::vector<Poly>& premises) {
    std::vector<Poly> kept;
    for (auto& h : premises) {
        if (h.is_constant()) {
            if (h.constant_term() >= 0) continue;  // trivially true, useless as product
            // contradictory constant premise stays: it makes the constraint vacuous
        }
        bool dup = false;
        for (auto& k : kept)
            if (k == h) {
                dup = true;
                break;
            }
        if (!dup) kept.push_back(h);
    }
    premises = std::move(kept);
}

} // namespace

std::vector<Poly> box_atoms(const fp::Box& box, const std::vector<int>& vars) {
    std::vector<Poly> out;
    for (int v : vars) {
        out.push_back(Poly::variable(v) - Poly(box.iv[static_cast<size_t>(v)].first));
        out.push_back(Poly(box.iv[static_cast<size_t>(v)].second) - Poly::variable(v));
    }
    return out;
}

std::vector<Poly> clear_division(const RatFunc& h, const std::optional<fp::Box>& box, int depth) {
    if (h.is_poly()) return {h.as_poly()};
    if (box) {
        Interval d = fp::interval_eval(RatFunc(h.den), *box, depth);
        if (d.lo > 0) return {h.num};
        if (d.hi < 0) return {-h.num};
    }
    return {h.num * h.den};
}

ImplicationConstraint initiation(const Template& tpl, const std::vector<lang::InitAtom>& init,
                                 int loc, const VarTable& xvars) {
    ImplicationConstraint c;
    c.name = "initiation_l" + std::to_string(loc);
    c.qvars = make_qvars(xvars);
    for (auto& a : init) c.premises.push_back(a.poly);  // strict atoms weaken to closure
    dedup_premises(c.premises);
    c.conclusion = tpl.instantiate_identity(loc, xvars.size());
    return c;
}

ImplicationConstraint consecution_r1(const Template& tpl, const TransitionData& td,
                                     const std::optional<fp::Box>& b_src, const VarTable& xvars,
                                     const SolveConfig& cfg, int src_loc, int tgt_loc, int depth) {
    int n = xvars.size();
    ImplicationConstraint c;
    c.name = "consecution_r1_t" + std::to_string(src_loc) + "_" + std::to_string(tgt_loc);
    c.qvars = make_qvars(xvars);

    if (cfg.algo == Algo::A && b_src) {
        std::vector<int> all(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v) all[static_cast<size_t>(v)] = v;
        auto ba = box_atoms(*b_src, all);
        c.premises.insert(c.premises.end(), ba.begin(), ba.end());
    }
    c.premises.insert(c.premises.end(), td.guard_relaxed.begin(), td.guard_relaxed.end());

    std::vector<Poly> args(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Poly& g = td.gamma[static_cast<size_t>(j)];
        const RatFunc& f = td.exact[static_cast<size_t>(j)];
        if (g.is_zero() && f.is_poly()) {
            args[static_cast<size_t>(j)] = f.as_poly();  // exact coordinate, substituted away
            continue;
        }
        int pid = n + j;
        args[static_cast<size_t>(j)] = Poly::variable(pid);
        RatFunc xp = RatFunc::variable(pid);
        // -gamma <= x' - F(x,0) <= gamma, division cleared
        for (auto& h : clear_division(xp - f + RatFunc(g), b_src, depth)) c.premises.push_back(h);
        for (auto& h : clear_division(f - xp + RatFunc(g), b_src, depth)) c.premises.push_back(h);
        if (cfg.algo == Algo::A && b_src && !td.gamma_symbolic) {
            // implied image interval for the primed variable
            Interval img = fp::interval_eval(f, *b_src, depth);
            Rat grat = g.constant_term();
            Rat lo = rat_of_double(img.lo) - grat, hi = rat_of_double(img.hi) + grat;
            c.premises.push_back(Poly::variable(pid) - Poly(lo));
            c.premises.push_back(Poly(hi) - Poly::variable(pid));
        }
    }
    if (td.gamma_symbolic) add_abs_atoms(c.premises, td.gamma, n);
    dedup_premises(c.premises);

    c.conclusion = linpoly_add(tpl.instantiate(tgt_loc, args),
                               linpoly_scale(tpl.instantiate_identity(src_loc, n), -cfg.bar));
    return c;
}

ImplicationConstraint consecution_r2(const Template& tpl, const TransitionData& td,
                                     const std::optional<fp::Box>& b_src, const VarTable& xvars,
                                     const SolveConfig& cfg, int src_loc, int tgt_loc) {
    int n = xvars.size();
    ImplicationConstraint c;
    c.name = "consecution_r2_t" + std::to_string(src_loc) + "_" + std::to_string(tgt_loc);
    c.qvars = make_qvars(xvars);

    if (cfg.algo == Algo::A && b_src) {
        std::vector<int> all(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v) all[static_cast<size_t>(v)] = v;
        auto ba = box_atoms(*b_src, all);
        c.premises.insert(c.premises.end(), ba.begin(), ba.end());
    }
    c.premises.insert(c.premises.end(), td.guard_relaxed.begin(), td.guard_relaxed.end());

    std::vector<Poly> args(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Poly& g = td.gamma[static_cast<size_t>(j)];
        const RatFunc& f = td.exact[static_cast<size_t>(j)];
        if (!f.is_poly())
            throw std::domain_error(
                "second relaxation needs polynomial updates; use the first relaxation for division");
        if (g.is_zero()) {
            args[static_cast<size_t>(j)] = f.as_poly();
            continue;
        }
        int rid = 2 * n + j;
        args[static_cast<size_t>(j)] = f.as_poly() + Poly::variable(rid);
        c.premises.push_back(g - Poly::variable(rid));  // gamma - r >= 0
        c.premises.push_back(g + Poly::variable(rid));  // gamma + r >= 0
    }
    if (td.gamma_symbolic) add_abs_atoms(c.premises, td.gamma, n);
    dedup_premises(c.premises);

    c.conclusion = linpoly_add(tpl.instantiate(tgt_loc, args),
                               linpoly_scale(tpl.instantiate_identity(src_loc, n), -cfg.bar));
    return c;
}

std::vector<ImplicationConstraint> range_constraints(const Template& tpl, int loc,
                                                     const VarTable& xvars, int target,
                                                     RangeBound up, RangeBound low, const Rat& a,
                                                     const std::vector<Poly>& extra) {
    std::vector<ImplicationConstraint> out;
    LinPoly neg_eta_a = linpoly_scale(tpl.instantiate_identity(loc, xvars.size()), Rat(-1));
    neg_eta_a[Monomial::one()] += AffForm(-a);
    if (neg_eta_a[Monomial::one()].is_zero()) neg_eta_a.erase(Monomial::one());

    auto build = [&](bool upper, const RangeBound& b) {
        ImplicationConstraint c;
        c.name = std::string(upper ? "range_up" : "range_low") + "_l" + std::to_string(loc);
        c.qvars = make_qvars(xvars);
        Poly t = Poly::variable(target);
        Poly bound;
        if (b.value) {
            bound = Poly(*b.value);
        } else {
            int pid = c.qvars.intern(upper ? "up" : "low");
            c.param_vars.insert(pid);
            bound = Poly::variable(pid);
        }
        c.premises.push_back(upper ? t - bound : bound - t);
        c.premises.insert(c.premises.end(), extra.begin(), extra.end());
        dedup_premises(c.premises);
        c.conclusion = neg_eta_a;
        return c;
    };
    out.push_back(build(true, up));
    out.push_back(build(false, low));
    return out;
}

std::vector<ImplicationConstraint> entailment_constraints(const Template& tpl, int loc,
                                                          const VarTable& xvars, const fp::Box& b,
                                                          const std::vector<int>& vars_to_check,
                                                          const Rat& a,
                                                          const std::vector<Poly>& extra) {
    std::vector<ImplicationConstraint> out;
    for (int v : vars_to_check) {
        auto pair = range_constraints(tpl, loc, xvars, v,
                                      RangeBound{b.iv[static_cast<size_t>(v)].second},
                                      RangeBound{b.iv[static_cast<size_t>(v)].first}, a, extra);
        pair[0].name = "entail_up_" + xvars.name(v) + "_l" + std::to_string(loc);
        pair[1].name = "entail_low_" + xvars.name(v) + "_l" + std::to_string(loc);
        out.push_back(std::move(pair[0]));
        out.push_back(std::move(pair[1]));
    }
    return out;
}

std::string ImplicationConstraint::dump(const Registry& reg) const {
    std::ostringstream os;
    os << "[";
    bool first = true;
    for (auto& h : premises) {
        if (!first) os << ", ";
        first = false;
        os << h.str(qvars) << " >= 0";
    }
    os << "] => ";
    bool f2 = true;
    for (auto& [m, aff] : conclusion) {
        if (!f2) os << " + ";
        f2 = false;
        os << "(" << aff.str(reg) << ")";
        if (!m.is_one()) os << "*" << m.str(qvars);
    }
    if (conclusion.empty()) os << "0";
    os << " >= 0";
    return os.str();
}

} // namespace fpinv::cons
