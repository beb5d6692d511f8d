// Rational functions P/Q. Composition of loop-body updates with division
// (e.g. Newton steps) lives here; no gcd cancellation is attempted beyond
// constant denominators and syntactically equal denominators on addition.

#pragma once

#include "fpinv/polynomial.hpp"

namespace fpinv {

struct RatFunc {
    Poly num;
    Poly den = Poly(Rat(1));

    RatFunc() = default;
    explicit RatFunc(Poly n) : num(std::move(n)) {}
    RatFunc(Poly n, Poly d);

    static RatFunc constant(const Rat& c) { return RatFunc(Poly(c)); }
    static RatFunc variable(int v) { return RatFunc(Poly::variable(v)); }

    bool is_poly() const { return den.is_constant(); }
    // Valid only when is_poly().
    Poly as_poly() const;

    RatFunc operator+(const RatFunc& o) const;
    RatFunc operator-(const RatFunc& o) const;
    RatFunc operator-() const;
    RatFunc operator*(const RatFunc& o) const;
    RatFunc operator/(const RatFunc& o) const;

    RatFunc derivative(int v) const;
    RatFunc subst(const std::map<int, RatFunc>& sub) const;
    Rat eval(const std::vector<Rat>& point) const;
    Interval eval_interval(const std::vector<Interval>& point) const;

    std::string str(const VarTable& vars) const;

private:
    void normalize();
};

} // namespace fpinv
