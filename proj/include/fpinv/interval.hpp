// Interval arithmetic over double endpoints with outward rounding.
// Every operation widens the result by one ulp on each side, which is
// cruder than switching the FPU rounding mode but sound and portable.

#pragma once

#include "fpinv/rational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpinv {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    explicit Interval(double v) : lo(v), hi(v) {}
    Interval(double l, double h) : lo(l), hi(h) {}

    static Interval hull(const Interval& a, const Interval& b) {
        return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
    }

    bool contains(double v) const { return lo <= v && v <= hi; }
    bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }
    double width() const { return hi - lo; }
    double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
    // Lower bound on |x| over the interval.
    double mig() const {
        return contains_zero() ? 0.0 : std::min(std::fabs(lo), std::fabs(hi));
    }
};

namespace detail {
inline double down(double x) {
    return std::nextafter(x, -std::numeric_limits<double>::infinity());
}
inline double up(double x) {
    return std::nextafter(x, std::numeric_limits<double>::infinity());
}
} // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) {
    return Interval(detail::down(a.lo + b.lo), detail::up(a.hi + b.hi));
}

inline Interval operator-(const Interval& a, const Interval& b) {
    return Interval(detail::down(a.lo - b.hi), detail::up(a.hi - b.lo));
}

inline Interval operator-(const Interval& a) { return Interval(-a.hi, -a.lo); }

inline Interval operator*(const Interval& a, const Interval& b) {
    const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return Interval(detail::down(std::min(std::min(p1, p2), std::min(p3, p4))),
                    detail::up(std::max(std::max(p1, p2), std::max(p3, p4))));
}

inline Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains_zero())
        throw std::domain_error("interval division: denominator straddles zero");
    const double p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
    return Interval(detail::down(std::min(std::min(p1, p2), std::min(p3, p4))),
                    detail::up(std::max(std::max(p1, p2), std::max(p3, p4))));
}

// x^k with even-power awareness: [-1,1]^2 = [0,1], not [-1,1].
inline Interval ipow(const Interval& a, unsigned k) {
    if (k == 0) return Interval(1.0);
    if (k == 1) return a;
    if (k % 2 == 0) {
        const double m = a.mag(), mi = a.mig();
        Interval r(1.0);
        Interval base(mi, m);
        for (unsigned j = 0; j < k; ++j) r = r * base;
        if (r.lo < 0) r.lo = 0;
        return r;
    }
    Interval r = a;
    for (unsigned j = 1; j < k; ++j) r = r * a;
    return r;
}

// Outward-rounded enclosure of a rational.
inline Interval interval_of_rat(const Rat& x) {
    const double d = rat_to_double(x);
    double lo = d, hi = d;
    if (Rat(d) > x) lo = detail::down(d);
    if (Rat(d) < x) hi = detail::up(d);
    return Interval(lo, hi);
}

} // namespace fpinv
