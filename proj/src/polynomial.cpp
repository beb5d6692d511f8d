#include "fpinv/polynomial.hpp"

#include <algorithm>
#include <sstream>

namespace fpinv {

Rat rat_parse(const std::string& s) {
    // Plain integer or num/den go straight to GMP.
    if (s.find_first_of(".eE") == std::string::npos) {
        Rat r;
        if (mpq_set_str(r.get_mpq_t(), s.c_str(), 10) != 0)
            throw std::invalid_argument("bad rational literal: " + s);
        r.canonicalize();
        return r;
    }
    // Decimal / scientific literal, parsed exactly.
    size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');
    std::string digits;
    long frac_digits = 0, expo = 0;
    bool seen_digit = false, seen_dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            digits += c;
            seen_digit = true;
            if (seen_dot) ++frac_digits;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if ((c == 'e' || c == 'E') && seen_digit) {
            expo = std::stol(s.substr(i + 1));
            break;
        } else {
            throw std::invalid_argument("bad numeric literal: " + s);
        }
    }
    if (!seen_digit) throw std::invalid_argument("bad numeric literal: " + s);
    Rat mant(digits.empty() ? "0" : digits);
    long p10 = expo - frac_digits;
    Rat scale(1);
    mpz_class ten5;
    mpz_ui_pow_ui(ten5.get_mpz_t(), 10, static_cast<unsigned long>(p10 < 0 ? -p10 : p10));
    if (p10 >= 0)
        mant *= Rat(ten5);
    else
        mant /= Rat(ten5);
    mant.canonicalize();
    return neg ? Rat(-mant) : mant;
}

Monomial Monomial::operator*(const Monomial& o) const {
    Monomial r;
    r.f.reserve(f.size() + o.f.size());
    size_t i = 0, j = 0;
    while (i < f.size() || j < o.f.size()) {
        if (j == o.f.size() || (i < f.size() && f[i].first < o.f[j].first))
            r.f.push_back(f[i++]);
        else if (i == f.size() || o.f[j].first < f[i].first)
            r.f.push_back(o.f[j++]);
        else {
            r.f.emplace_back(f[i].first, f[i].second + o.f[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

bool Monomial::operator<(const Monomial& o) const {
    int da = degree(), db = o.degree();
    if (da != db) return da < db;
    // Same degree: the monomial with the higher exponent on the earliest
    // variable comes first (x^2 before x*i before i^2).
    size_t i = 0, j = 0;
    while (i < f.size() && j < o.f.size()) {
        if (f[i].first != o.f[j].first) return f[i].first < o.f[j].first;
        if (f[i].second != o.f[j].second) return f[i].second > o.f[j].second;
        ++i;
        ++j;
    }
    return false; // equal
}

std::string Monomial::str(const VarTable& vars) const {
    if (f.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (auto& [v, e] : f) {
        if (!first) os << "*";
        first = false;
        os << vars.name(v);
        if (e > 1) os << "^" << e;
    }
    return os.str();
}

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    for (auto& [m, c] : o.t_) r.add_term(m, c);
    return r;
}

Poly Poly::operator-(const Poly& o) const {
    Poly r = *this;
    for (auto& [m, c] : o.t_) r.add_term(m, -c);
    return r;
}

Poly Poly::operator-() const {
    Poly r;
    for (auto& [m, c] : t_) r.t_[m] = -c;
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    Poly r;
    for (auto& [m1, c1] : t_)
        for (auto& [m2, c2] : o.t_) r.add_term(m1 * m2, c1 * c2);
    return r;
}

Poly Poly::operator*(const Rat& c) const {
    Poly r;
    if (c == 0) return r;
    for (auto& [m, k] : t_) r.t_[m] = k * c;
    return r;
}

Poly Poly::pow(unsigned k) const {
    Poly r = Poly(Rat(1));
    Poly base = *this;
    while (k) {
        if (k & 1u) r = r * base;
        base = base * base;
        k >>= 1u;
    }
    return r;
}

Poly Poly::derivative(int v) const {
    Poly r;
    for (auto& [m, c] : t_) {
        int e = m.exponent(v);
        if (e == 0) continue;
        Monomial dm;
        for (auto& [w, k] : m.f) {
            if (w == v) {
                if (k > 1) dm.f.emplace_back(w, k - 1);
            } else {
                dm.f.emplace_back(w, k);
            }
        }
        r.add_term(dm, c * e);
    }
    return r;
}

Poly Poly::subst(const std::map<int, Poly>& sub) const {
    Poly r;
    for (auto& [m, c] : t_) {
        Poly term = Poly(c);
        for (auto& [v, e] : m.f) {
            auto it = sub.find(v);
            if (it == sub.end())
                term = term * Poly::variable(v).pow(static_cast<unsigned>(e));
            else
                term = term * it->second.pow(static_cast<unsigned>(e));
        }
        r = r + term;
    }
    return r;
}

Rat Poly::eval(const std::vector<Rat>& point) const {
    Rat r(0);
    for (auto& [m, c] : t_) {
        Rat term = c;
        for (auto& [v, e] : m.f) {
            Rat p = point.at(static_cast<size_t>(v));
            for (int k = 0; k < e; ++k) term *= p;
        }
        r += term;
    }
    return r;
}

double Poly::eval_d(const std::vector<double>& point) const {
    double r = 0;
    for (auto& [m, c] : t_) {
        double term = rat_to_double(c);
        for (auto& [v, e] : m.f) term *= std::pow(point.at(static_cast<size_t>(v)), e);
        r += term;
    }
    return r;
}

Interval Poly::eval_interval(const std::vector<Interval>& point) const {
    Interval r(0.0);
    for (auto& [m, c] : t_) {
        Interval term = interval_of_rat(c);
        for (auto& [v, e] : m.f)
            term = term * ipow(point.at(static_cast<size_t>(v)), static_cast<unsigned>(e));
        r = r + term;
    }
    // Univariate polynomials also get a Horner-form enclosure, which tracks
    // the correlation between powers away from zero; both enclose the range,
    // so their intersection is sound.
    std::vector<int> vs = vars_used();
    if (vs.size() == 1) {
        int v = vs[0];
        int deg = degree();
        std::vector<Interval> coef(static_cast<size_t>(deg) + 1, Interval(0.0));
        for (auto& [m, c] : t_) coef[static_cast<size_t>(m.exponent(v))] = interval_of_rat(c);
        Interval x = point.at(static_cast<size_t>(v));
        Interval h = coef[static_cast<size_t>(deg)];
        for (int k = deg - 1; k >= 0; --k) h = h * x + coef[static_cast<size_t>(k)];
        Interval meet(std::max(r.lo, h.lo), std::min(r.hi, h.hi));
        if (meet.lo <= meet.hi) return meet;
    }
    return r;
}

Poly Poly::abs_image(const std::map<int, int>& absmap) const {
    Poly r;
    for (auto& [m, c] : t_) {
        Monomial am;
        for (auto& [v, e] : m.f) {
            auto it = absmap.find(v);
            am = am * Monomial::var(it == absmap.end() ? v : it->second, e);
        }
        r.add_term(am, rat_abs(c));
    }
    return r;
}

std::vector<int> Poly::vars_used() const {
    std::vector<int> vs;
    for (auto& [m, c] : t_)
        for (auto& [v, e] : m.f)
            if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
    std::sort(vs.begin(), vs.end());
    return vs;
}

std::string Poly::str(const VarTable& vars) const {
    if (t_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [m, c] : t_) {
        Rat a = rat_abs(c);
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        first = false;
        if (m.is_one())
            os << rat_str(a);
        else if (a == 1)
            os << m.str(vars);
        else
            os << rat_str(a) << "*" << m.str(vars);
    }
    return os.str();
}

} // namespace fpinv
