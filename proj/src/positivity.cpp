#include "fpinv/positivity.hpp"

#include <set>
#include <sstream>

namespace fpinv::pos {

namespace {

std::string poly_key(const Poly& p) {
    std::ostringstream os;
    for (auto& [m, c] : p.terms()) {
        for (auto& [v, e] : m.f) os << v << "^" << e << ".";
        os << ":" << rat_str(c) << ";";
    }
    return os.str();
}

} // namespace

ProductBasis enumerate_products(const std::vector<Poly>& theta, int m, int degree_cap) {
    ProductBasis out;
    std::set<std::string> seen;
    auto push = [&](const Poly& p, std::vector<int> idx) {
        std::string k = poly_key(p);
        if (seen.insert(k).second) {
            out.products.push_back(p);
            out.factors.push_back(std::move(idx));
        }
    };
    push(Poly(Rat(1)), {});
    // multisets in lexicographically nondecreasing index order
    std::function<void(size_t, int, const Poly&, std::vector<int>&)> rec =
        [&](size_t start, int left, const Poly& acc, std::vector<int>& idx) {
            for (size_t j = start; j < theta.size(); ++j) {
                Poly p = acc * theta[j];
                idx.push_back(static_cast<int>(j));
                bool within = degree_cap <= 0 || p.degree() <= degree_cap;
                if (within) {
                    push(p, idx);
                    if (left > 1) rec(j, left - 1, p, idx);
                }
                idx.pop_back();
            }
        };
    std::vector<int> idx;
    if (m >= 1 && !theta.empty()) rec(0, m, Poly(Rat(1)), idx);
    return out;
}

std::vector<Poly> theta_for(const cons::ImplicationConstraint& c, bool aug_squares) {
    std::vector<Poly> theta = c.premises;
    if (aug_squares) {
        std::set<int> vars;
        for (auto& h : c.premises)
            for (int v : h.vars_used())
                if (!c.param_vars.count(v)) vars.insert(v);
        for (auto& [m, aff] : c.conclusion)
            for (auto& [v, e] : m.f) vars.insert(v);
        for (int v : vars) {
            Poly sq = Poly::variable(v) * Poly::variable(v);
            theta.push_back(sq);
        }
    }
    return theta;
}

LinearCertSystem match_coefficients(const cons::ImplicationConstraint& c, const ProductBasis& basis,
                                    cons::Registry& reg, const std::string& prefix) {
    LinearCertSystem sys;
    for (size_t j = 0; j < basis.products.size(); ++j)
        sys.lambdas.push_back(reg.add(prefix + "_" + std::to_string(j), true));

    // split a monomial into its parameter part and quantified part
    auto split = [&](const Monomial& m) {
        Monomial params, vars;
        for (auto& [v, e] : m.f) {
            if (c.param_vars.count(v))
                params = params * Monomial::var(v, e);
            else
                vars = vars * Monomial::var(v, e);
        }
        return std::make_pair(params, vars);
    };

    std::map<Monomial, CertRow> rows;
    for (size_t j = 0; j < basis.products.size(); ++j) {
        for (auto& [m, coef] : basis.products[j].terms()) {
            auto [params, vars] = split(m);
            CertRow& row = rows[vars];
            row.mono = vars;
            row.lambda_terms.push_back(CertRow::LTerm{sys.lambdas[j], params, coef});
            if (!params.is_one()) row.bilinear = true;
        }
    }
    for (auto& [m, aff] : c.conclusion) {
        auto [params, vars] = split(m);
        if (!params.is_one())
            throw std::logic_error("conclusion mentions a parameter variable");
        CertRow& row = rows[vars];
        row.mono = vars;
        row.aff += -aff;
    }
    for (auto& [m, row] : rows) {
        sys.bilinear = sys.bilinear || row.bilinear;
        sys.rows.push_back(std::move(row));
    }
    return sys;
}

LinearCertSystem assemble(const std::vector<LinearCertSystem>& blocks, bool require_lp) {
    LinearCertSystem sys;
    for (auto& b : blocks) {
        sys.bilinear = sys.bilinear || b.bilinear;
        sys.lambdas.insert(sys.lambdas.end(), b.lambdas.begin(), b.lambdas.end());
        sys.rows.insert(sys.rows.end(), b.rows.begin(), b.rows.end());
    }
    if (require_lp && sys.bilinear)
        throw std::domain_error(
            "bilinear rows present (symbolic up/low); the binary-search strategy needs concrete bounds");
    return sys;
}

std::string LinearCertSystem::dump(const cons::Registry& reg, const VarTable& qvars) const {
    std::ostringstream os;
    for (auto& row : rows) {
        os << "eq";
        bool first = true;
        for (auto& t : row.lambda_terms) {
            os << (first ? " " : " + ");
            first = false;
            os << rat_str(t.coef) << "*" << reg.name(t.lambda);
            if (!t.params.is_one()) os << "*" << t.params.str(qvars);
        }
        Rat rhs = -row.aff.k;
        for (auto& [id, cf] : row.aff.lin) {
            os << (first ? " " : " + ");
            first = false;
            os << rat_str(cf) << "*" << reg.name(id);
        }
        if (first) os << " 0";
        os << " = " << rat_str(rhs) << "   # " << row.mono.str(qvars) << "\n";
    }
    for (int l : lambdas) os << reg.name(l) << " >= 0\n";
    return os.str();
}

} // namespace fpinv::pos
