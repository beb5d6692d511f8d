// Exact rational arithmetic. All constraint construction, coefficient
// matching and the reference simplex run on mpq_class so that certificate
// identities can be re-checked with zero residual.

#pragma once

#include <gmpxx.h>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fpinv {

using Rat = mpq_class;

// Exact conversion: every finite double is a dyadic rational.
inline Rat rat_of_double(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("rat_of_double: non-finite value");
    return Rat(x);
}

// 2^e for possibly negative e.
inline Rat rat_pow2(int e) {
    Rat r(1);
    if (e >= 0)
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), e);
    else
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), -e);
    return r;
}

inline Rat rat_abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }

inline std::string rat_str(const Rat& x) { return x.get_str(); }

// Nearest double; used only at reporting/simulation boundaries.
inline double rat_to_double(const Rat& x) { return x.get_d(); }

// Parses "p", "p/q" or a decimal literal like "-1.25" or "2.5e-3" exactly.
Rat rat_parse(const std::string& s);

// Smallest multiple of 2^-bits that is >= x. Keeps upper bounds sound while
// capping denominator growth in the certificate systems.
inline Rat rat_ceil_dyadic(const Rat& x, int bits) {
    Rat scaled = x * rat_pow2(bits);
    mpz_class n = scaled.get_num() / scaled.get_den();
    if (Rat(n) < scaled) n += 1;
    return Rat(n) * rat_pow2(-bits);
}

} // namespace fpinv
