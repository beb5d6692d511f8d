// Template setup and the universally quantified implication constraints:
// initiation, barrier-loosened consecution in both relaxations, range
// minimization rows and coarse-entailment rows, with division cleared
// against interval sign information.

#pragma once

#include "fpinv/cfg.hpp"
#include "fpinv/fpmodel.hpp"

#include <optional>
#include <set>

namespace fpinv::cons {

// Registry of solver unknowns: template coefficients (free), the Handelman
// multipliers (nonnegative), and optional parameters.
class Registry {
public:
    int add(const std::string& name, bool nonneg) {
        names_.push_back(name);
        nonneg_.push_back(nonneg);
        return static_cast<int>(names_.size()) - 1;
    }
    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_.at(static_cast<size_t>(i)); }
    bool nonneg(int i) const { return nonneg_.at(static_cast<size_t>(i)); }
    void truncate_to(int n) {
        names_.resize(static_cast<size_t>(n));
        nonneg_.resize(static_cast<size_t>(n));
    }

private:
    std::vector<std::string> names_;
    std::vector<bool> nonneg_;
};

// Affine form over registry unknowns.
struct AffForm {
    Rat k;
    std::map<int, Rat> lin;

    AffForm() : k(0) {}
    explicit AffForm(const Rat& c) : k(c) {}
    static AffForm unknown(int id, const Rat& c = Rat(1)) {
        AffForm a;
        a.lin[id] = c;
        return a;
    }
    bool is_zero() const { return k == 0 && lin.empty(); }
    AffForm& operator+=(const AffForm& o);
    AffForm operator*(const Rat& c) const;
    AffForm operator-() const { return *this * Rat(-1); }
    double eval(const std::vector<Rat>& assign) const;
    Rat eval_exact(const std::vector<Rat>& assign) const;
    std::string str(const Registry& reg) const;
};

// Polynomial over quantified variables whose coefficients are affine in the
// unknowns (the conclusion side of a constraint).
using LinPoly = std::map<Monomial, AffForm>;

LinPoly linpoly_add(const LinPoly& a, const LinPoly& b);
LinPoly linpoly_scale(const LinPoly& a, const Rat& c);
// Substitute exact polynomial assignments for the unknowns.
Poly linpoly_instantiate(const LinPoly& p, const std::vector<Rat>& assign);

struct ImplicationConstraint {
    std::string name;
    VarTable qvars;              // quantified variables of this constraint
    std::vector<Poly> premises;  // h_i >= 0, no unknowns
    LinPoly conclusion;          // affine in unknowns
    std::set<int> param_vars;    // qvars treated as free parameters (symbolic up/low)
    std::string dump(const Registry& reg) const;
};

struct Template {
    int degree = 1;
    std::vector<Monomial> basis;              // canonical order, C(|X|+d, d) entries
    std::vector<std::vector<int>> coeff_ids;  // [location][basis index] -> unknown id

    // eta_loc with each program variable v replaced by args[v].
    LinPoly instantiate(int loc, const std::vector<Poly>& args) const;
    LinPoly instantiate_identity(int loc, int nvars) const;
    Poly solved(int loc, const std::vector<Rat>& assign) const;
};

std::vector<Monomial> monomial_basis(int nvars, int degree);
Template make_template(int nvars, int degree, const std::vector<int>& locations, Registry& reg);

enum class Relax { R1, R2 };
enum class Algo { A, B };

struct SolveConfig {
    Rat bar = Rat(1, 10);
    Rat a = Rat(1, 10000);
    int m = 2;
    int degree = 2;
    Relax relax = Relax::R2;
    Algo algo = Algo::A;
    bool aug_squares = true;   // augment theta with squares of the quantified variables
    bool abs_even = false;     // evenize symbolic bounds (Algorithm B)
    int bisect_depth = 3;
    int product_degree_cap = 0;  // 0: auto = max(2*degree, degrees present)

    void validate() const;
};

// Everything consecution needs to know about one summarized transition.
struct TransitionData {
    const cfg::Transition* tr = nullptr;
    std::vector<RatFunc> exact;        // F(x, 0) per coordinate
    fp::AbstractedFunction abstracted; // rounding-annotated form
    std::vector<Poly> gamma;           // per coordinate; constant polys under Algorithm A
    bool gamma_symbolic = false;       // Algorithm B: polynomials over abs vars
    std::vector<Poly> guard_relaxed;   // b-bar atoms, division already cleared
};

ImplicationConstraint initiation(const Template& tpl, const std::vector<lang::InitAtom>& init,
                                 int loc, const VarTable& xvars);

// Premises: B(src) box atoms (Algorithm A), relaxed guard, the gamma rows
// for the primed variables (division-cleared, with implied image-interval
// atoms under Algorithm A), abs-variable atoms under Algorithm B.
// Conclusion: eta_tgt(x') - bar * eta_src(x).
ImplicationConstraint consecution_r1(const Template& tpl, const TransitionData& td,
                                     const std::optional<fp::Box>& b_src, const VarTable& xvars,
                                     const SolveConfig& cfg, int src_loc, int tgt_loc, int depth);

// Premises: B, relaxed guard, |r| <= gamma; conclusion eta_tgt(F(x,0)+r) - bar*eta_src(x).
ImplicationConstraint consecution_r2(const Template& tpl, const TransitionData& td,
                                     const std::optional<fp::Box>& b_src, const VarTable& xvars,
                                     const SolveConfig& cfg, int src_loc, int tgt_loc);

// {x - up >= 0} => -eta - a >= 0 and {low - x >= 0} => -eta - a >= 0 at the
// report location; `extra` premises (exit guard, verified ranges) are
// conjoined to both. Symbolic bounds introduce parameter variables instead.
struct RangeBound {
    std::optional<Rat> value;  // concrete; nullopt = symbolic parameter
};
std::vector<ImplicationConstraint> range_constraints(const Template& tpl, int loc,
                                                     const VarTable& xvars, int target,
                                                     RangeBound up, RangeBound low, const Rat& a,
                                                     const std::vector<Poly>& extra);

// Coarse-range entailment rows: range constraints with the bounds pinned to
// B's endpoints, one pair per requested variable.
std::vector<ImplicationConstraint> entailment_constraints(const Template& tpl, int loc,
                                                          const VarTable& xvars, const fp::Box& b,
                                                          const std::vector<int>& vars_to_check,
                                                          const Rat& a,
                                                          const std::vector<Poly>& extra);

// h = P/Q >= 0 becomes P >= 0, -P >= 0 or P*Q >= 0 depending on the sign of
// Q over the box (interval-decided); polynomial input passes through.
std::vector<Poly> clear_division(const RatFunc& h, const std::optional<fp::Box>& box, int depth);

// Box atoms lo <= v <= hi as two premises per variable.
std::vector<Poly> box_atoms(const fp::Box& box, const std::vector<int>& vars);

} // namespace fpinv::cons
