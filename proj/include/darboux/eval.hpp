#pragma once

// Arbitrary-precision numeric evaluation of canonical forms at rational
// points. Pure rational subvalues are computed exactly so that poles of the
// rational fragment are detected exactly rather than by magnitude.

#include "ratform.hpp"

#include <cmath>
#include <map>
#include <optional>

namespace darboux {

struct Point {
    Rat x, y;
};

namespace detail {
inline unsigned digits10_of_bits(unsigned bits) {
    return static_cast<unsigned>(bits * 0.30103) + 4;
}
}  // namespace detail

// Scoped mpfr working precision, in bits.
struct PrecGuard {
    unsigned old;
    explicit PrecGuard(unsigned bits) : old(Float::default_precision()) {
        Float::default_precision(detail::digits10_of_bits(bits));
    }
    ~PrecGuard() { Float::default_precision(old); }
};

namespace detail {

inline Float pow_rat_exp(const Float& base, const Rat& e) {
    namespace mp = boost::multiprecision;
    if (is_integer(e)) {
        long k = numerator(e).convert_to<long>();
        if (base == 0) {
            if (k < 0) throw Error(Errc::pole_at_point, "zero base with negative exponent");
            return Float(k == 0 ? 1 : 0);
        }
        if (k < 0) return 1 / mp::pow(base, static_cast<unsigned long>(-k));
        return mp::pow(base, static_cast<unsigned long>(k));
    }
    if (base < 0) throw Error(Errc::domain_error, "negative base under fractional power");
    if (base == 0) {
        if (e < 0) throw Error(Errc::pole_at_point, "zero base with negative exponent");
        return Float(0);
    }
    return mp::exp(static_cast<Float>(e) * mp::log(base));
}

Float rf_value(const RatForm& a, const Point& pt, std::map<int, Float>& memo);

inline Float atom_value(int gen, const Point& pt, std::map<int, Float>& memo) {
    auto it = memo.find(gen);
    if (it != memo.end()) return it->second;
    namespace mp = boost::multiprecision;
    const AtomInfo& ai = AtomTable::inst().info(gen);
    Float v;
    switch (ai.kind) {
        case FunKind::sin_k: v = mp::sin(rf_value(*ai.arg, pt, memo)); break;
        case FunKind::cos_k: v = mp::cos(rf_value(*ai.arg, pt, memo)); break;
        case FunKind::exp_k: v = mp::exp(rf_value(*ai.arg, pt, memo)); break;
        case FunKind::log_k: {
            Float a = rf_value(*ai.arg, pt, memo);
            if (a <= 0) throw Error(Errc::domain_error, "log of a non-positive value");
            v = mp::log(a);
            break;
        }
        case FunKind::pow_k: v = pow_rat_exp(rf_value(*ai.arg, pt, memo), ai.pexp); break;
    }
    memo.emplace(gen, v);
    return v;
}

inline std::optional<Rat> poly_value_exact(const Poly& p, const Point& pt) {
    Rat acc(0);
    for (const auto& [m, c] : p.t) {
        Rat t = c;
        for (const auto& [g, e] : m.f) {
            if (g >= 2 || !is_integer(e)) return std::nullopt;
            t *= rat_pow_int(g == gen_x ? pt.x : pt.y, numerator(e));
        }
        acc += t;
    }
    return acc;
}

inline Float poly_value(const Poly& p, const Point& pt, std::map<int, Float>& memo) {
    Float acc(0);
    for (const auto& [m, c] : p.t) {
        Float t = static_cast<Float>(c);
        for (const auto& [g, e] : m.f) {
            Float gv = g < 2 ? static_cast<Float>(g == gen_x ? pt.x : pt.y)
                             : atom_value(g, pt, memo);
            t *= pow_rat_exp(gv, e);
        }
        acc += t;
    }
    return acc;
}

inline Float rf_value(const RatForm& a, const Point& pt, std::map<int, Float>& memo) {
    namespace mp = boost::multiprecision;
    std::optional<Rat> dxct = poly_value_exact(a.den, pt);
    if (dxct && *dxct == 0) throw Error(Errc::pole_at_point, "denominator vanishes at point");
    std::optional<Rat> nxct = poly_value_exact(a.num, pt);
    if (nxct && dxct) {
        Rat q(*nxct);
        q /= *dxct;  // keep a materialized Rat: casting an mpq expression
                     // template to Float picks a pathological precision
        return static_cast<Float>(q);
    }
    Float dv = dxct ? static_cast<Float>(*dxct) : poly_value(a.den, pt, memo);
    if (!dxct && mp::abs(dv) < 1e-15)
        throw Error(Errc::pole_at_point, "denominator too small at point");
    Float nv = nxct ? static_cast<Float>(*nxct) : poly_value(a.num, pt, memo);
    return nv / dv;
}

struct RfTraits {
    bool has_atoms = false;
    bool needs_positive = false;
};

inline void rf_traits(const RatForm& a, RfTraits& t);

inline void poly_traits(const Poly& p, RfTraits& t) {
    for (const auto& [m, c] : p.t)
        for (const auto& [g, e] : m.f) {
            if (!is_integer(e)) t.needs_positive = true;
            if (g >= 2) {
                t.has_atoms = true;
                const AtomInfo& ai = AtomTable::inst().info(g);
                if (ai.kind == FunKind::log_k || ai.kind == FunKind::pow_k)
                    t.needs_positive = true;
                rf_traits(*ai.arg, t);
            }
        }
}

inline void rf_traits(const RatForm& a, RfTraits& t) {
    poly_traits(a.num, t);
    poly_traits(a.den, t);
}

}  // namespace detail

// Correct to within a couple of ulp at the requested precision: evaluation
// happens with 64 guard bits, then rounds down to the target.
inline Float rf_evaluate(const RatForm& a, const Point& pt, unsigned prec_bits) {
    PrecGuard guard(prec_bits + 64);
    std::map<int, Float> memo;
    Float v = detail::rf_value(a, pt, memo);
    v.precision(detail::digits10_of_bits(prec_bits));
    return v;
}

}  // namespace darboux
