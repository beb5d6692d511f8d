#include "fpinv/ratfunc.hpp"

namespace fpinv {

RatFunc::RatFunc(Poly n, Poly d) : num(std::move(n)), den(std::move(d)) {
    if (den.is_zero()) throw std::domain_error("rational function with zero denominator");
    normalize();
}

void RatFunc::normalize() {
    if (num.is_zero()) {
        den = Poly(Rat(1));
        return;
    }
    if (den.is_constant()) {
        Rat c = den.constant_term();
        if (c != 1) {
            num = num * Rat(1 / c);
            den = Poly(Rat(1));
        }
    }
}

Poly RatFunc::as_poly() const {
    if (!is_poly()) throw std::domain_error("rational function is not a polynomial");
    Rat c = den.constant_term();
    return c == 1 ? num : num * Rat(1 / c);
}

RatFunc RatFunc::operator+(const RatFunc& o) const {
    if (den == o.den) return RatFunc(num + o.num, den);
    return RatFunc(num * o.den + o.num * den, den * o.den);
}

RatFunc RatFunc::operator-(const RatFunc& o) const {
    if (den == o.den) return RatFunc(num - o.num, den);
    return RatFunc(num * o.den - o.num * den, den * o.den);
}

RatFunc RatFunc::operator-() const {
    RatFunc r = *this;
    r.num = -r.num;
    return r;
}

RatFunc RatFunc::operator*(const RatFunc& o) const {
    return RatFunc(num * o.num, den * o.den);
}

RatFunc RatFunc::operator/(const RatFunc& o) const {
    if (o.num.is_zero()) throw std::domain_error("division by zero rational function");
    return RatFunc(num * o.den, den * o.num);
}

RatFunc RatFunc::derivative(int v) const {
    if (is_poly()) return RatFunc(as_poly().derivative(v));
    // (n/d)' = (n'd - nd') / d^2
    return RatFunc(num.derivative(v) * den - num * den.derivative(v), den * den);
}

RatFunc RatFunc::subst(const std::map<int, RatFunc>& sub) const {
    // Substitute monomial-wise over num and den.
    auto subst_poly = [&sub](const Poly& p) {
        RatFunc acc = RatFunc(Poly(Rat(0)));
        for (auto& [m, c] : p.terms()) {
            RatFunc term = RatFunc::constant(c);
            for (auto& [v, e] : m.f) {
                auto it = sub.find(v);
                RatFunc base = (it == sub.end()) ? RatFunc::variable(v) : it->second;
                for (int k = 0; k < e; ++k) term = term * base;
            }
            acc = acc + term;
        }
        return acc;
    };
    return subst_poly(num) / subst_poly(den);
}

Rat RatFunc::eval(const std::vector<Rat>& point) const {
    Rat d = den.eval(point);
    if (d == 0) throw std::domain_error("rational function evaluation: denominator is zero");
    return num.eval(point) / d;
}

Interval RatFunc::eval_interval(const std::vector<Interval>& point) const {
    if (is_poly()) return as_poly().eval_interval(point);
    return num.eval_interval(point) / den.eval_interval(point);
}

std::string RatFunc::str(const VarTable& vars) const {
    if (is_poly()) return as_poly().str(vars);
    return "(" + num.str(vars) + ") / (" + den.str(vars) + ")";
}

} // namespace fpinv
