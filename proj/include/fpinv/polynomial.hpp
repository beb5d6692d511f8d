// Sparse multivariate polynomials with exact rational coefficients.
// Monomials are ordered degree-first, then by exponent vector so that
// e.g. over (x, i) the degree-2 basis reads 1, x, i, x^2, x*i, i^2.

#pragma once

#include "fpinv/interval.hpp"
#include "fpinv/rational.hpp"
#include "fpinv/varset.hpp"

#include <map>
#include <utility>
#include <vector>

namespace fpinv {

struct Monomial {
    // (var id, exponent) pairs, sorted by var id, all exponents > 0.
    std::vector<std::pair<int, int>> f;

    static Monomial one() { return Monomial{}; }
    static Monomial var(int v, int e = 1) {
        Monomial m;
        if (e > 0) m.f.emplace_back(v, e);
        return m;
    }

    int degree() const {
        int d = 0;
        for (auto& [v, e] : f) d += e;
        return d;
    }
    int exponent(int v) const {
        for (auto& [w, e] : f)
            if (w == v) return e;
        return 0;
    }
    bool is_one() const { return f.empty(); }

    Monomial operator*(const Monomial& o) const;
    bool operator==(const Monomial& o) const { return f == o.f; }
    bool operator<(const Monomial& o) const;

    std::string str(const VarTable& vars) const;
};

class Poly {
public:
    Poly() = default;
    explicit Poly(const Rat& c) {
        if (c != 0) t_[Monomial::one()] = c;
    }
    static Poly constant(const Rat& c) { return Poly(c); }
    static Poly variable(int v) {
        Poly p;
        p.t_[Monomial::var(v)] = 1;
        return p;
    }
    static Poly monomial(const Monomial& m, const Rat& c) {
        Poly p;
        if (c != 0) p.t_[m] = c;
        return p;
    }

    bool is_zero() const { return t_.empty(); }
    bool is_constant() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first.is_one()); }
    Rat constant_term() const {
        auto it = t_.find(Monomial::one());
        return it == t_.end() ? Rat(0) : it->second;
    }
    int degree() const {
        int d = 0;
        for (auto& [m, c] : t_) d = std::max(d, m.degree());
        return d;
    }
    Rat coeff(const Monomial& m) const {
        auto it = t_.find(m);
        return it == t_.end() ? Rat(0) : it->second;
    }
    size_t term_count() const { return t_.size(); }
    const std::map<Monomial, Rat>& terms() const { return t_; }

    void add_term(const Monomial& m, const Rat& c) {
        if (c == 0) return;
        auto [it, fresh] = t_.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) t_.erase(it);
        }
    }

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator-() const;
    Poly operator*(const Poly& o) const;
    Poly operator*(const Rat& c) const;
    Poly pow(unsigned k) const;
    bool operator==(const Poly& o) const { return t_ == o.t_; }

    Poly derivative(int v) const;
    // Simultaneous substitution; variables absent from the map stay themselves.
    Poly subst(const std::map<int, Poly>& sub) const;
    Rat eval(const std::vector<Rat>& point) const;
    double eval_d(const std::vector<double>& point) const;
    Interval eval_interval(const std::vector<Interval>& point) const;
    // Triangle-inequality image: every coefficient made nonnegative and every
    // variable v mapped to absmap[v].
    Poly abs_image(const std::map<int, int>& absmap) const;
    std::vector<int> vars_used() const;

    std::string str(const VarTable& vars) const;

private:
    std::map<Monomial, Rat> t_;
};

inline Poly operator*(const Rat& c, const Poly& p) { return p * c; }

} // namespace fpinv
