// Handelman linearization: enumerate premise products, match coefficients
// of the quantified-variable monomials, and assemble the linear certificate
// system with nonnegative multipliers.

#pragma once

#include "fpinv/constraints.hpp"

namespace fpinv::pos {

struct ProductBasis {
    std::vector<Poly> products;               // element 0 is the empty product (1)
    std::vector<std::vector<int>> factors;    // indices into theta, per product
};

// All multisets of at most m elements of theta, expanded and syntactically
// deduplicated, in deterministic order. degree_cap > 0 drops products of two
// or more factors whose expanded degree exceeds the cap (singletons and the
// empty product always stay).
ProductBasis enumerate_products(const std::vector<Poly>& theta, int m, int degree_cap = 0);

struct CertRow {
    struct LTerm {
        int lambda;       // registry id
        Monomial params;  // up/low parameter monomial; 1 in the pure LP case
        Rat coef;
    };
    Monomial mono;  // quantified-variable monomial this row matches
    std::vector<LTerm> lambda_terms;
    cons::AffForm aff;  // row states: sum of lambda terms + aff == 0
    bool bilinear = false;
};

struct LinearCertSystem {
    std::vector<CertRow> rows;
    std::vector<int> lambdas;  // registry ids with nonnegativity marks
    bool bilinear = false;
    int term_size() const { return static_cast<int>(lambdas.size()); }
    std::string dump(const cons::Registry& reg, const VarTable& qvars) const;
};

// One equality row per monomial of sum_j lambda_j g_j and of the conclusion;
// lambda ids are created in reg with the given name prefix.
LinearCertSystem match_coefficients(const cons::ImplicationConstraint& c, const ProductBasis& basis,
                                    cons::Registry& reg, const std::string& prefix);

// Block concatenation sharing the registry; throws when bilinear rows are
// present and the caller demands a pure LP.
LinearCertSystem assemble(const std::vector<LinearCertSystem>& blocks, bool require_lp);

// Premise products for a constraint: premises, optionally augmented with
// squares of the quantified variables in play.
std::vector<Poly> theta_for(const cons::ImplicationConstraint& c, bool aug_squares);

} // namespace fpinv::pos
