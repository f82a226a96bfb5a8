#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <string>

namespace darboux {

using Int = boost::multiprecision::mpz_int;
using Rat = boost::multiprecision::mpq_rational;
// Variable-precision float; precision is set per evaluation call.
using Float = boost::multiprecision::mpfr_float;

inline Int floor_div(const Int& a, const Int& b) {
    Int q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

inline Int rat_floor(const Rat& q) { return floor_div(numerator(q), denominator(q)); }

inline bool is_integer(const Rat& q) { return denominator(q) == 1; }

inline Rat rat_pow_int(const Rat& base, const Int& e) {
    if (e == 0) return Rat(1);
    Int n = abs(e);
    Rat acc(1), b = base;
    while (n > 0) {
        if ((n & 1) != 0) acc *= b;
        b *= b;
        n >>= 1;
    }
    if (e < 0) return Rat(1) / acc;
    return acc;
}

// Exact n-th root of v if it exists.
inline bool exact_root(const Int& v, unsigned long n, Int& out) {
    if (n == 0) return false;
    if (v < 0 && n % 2 == 0) return false;
    Int r;
    int exact = mpz_root(r.backend().data(), v.backend().data(), n);
    out = r;
    return exact != 0;
}

// base^(p/q) as an exact rational, when that is possible.
inline bool rat_pow_exact(const Rat& base, const Rat& e, Rat& out) {
    if (is_integer(e)) {
        if (base == 0 && e < 0) return false;
        out = base == 0 ? Rat(0) : rat_pow_int(base, numerator(e));
        return true;
    }
    if (base == 0) {
        if (e < 0) return false;
        out = 0;
        return true;
    }
    unsigned long q = denominator(e).convert_to<unsigned long>();
    Int rn, rd;
    if (!exact_root(numerator(base), q, rn)) return false;
    if (!exact_root(denominator(base), q, rd)) return false;
    out = rat_pow_int(Rat(rn) / Rat(rd), numerator(e));
    return true;
}

inline int rat_cmp(const Rat& a, const Rat& b) { return a < b ? -1 : (b < a ? 1 : 0); }

inline std::string rat_str(const Rat& q) {
    if (is_integer(q)) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

}  // namespace darboux
