#pragma once

#include <darboux/lpdo.hpp>

#include <random>

namespace testgen {

using namespace darboux;

inline int uniform(std::mt19937& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Rat rand_rat(std::mt19937& rng) {
    return Rat(uniform(rng, -5, 5)) / uniform(rng, 1, 3);
}

// Polynomial of total degree <= deg in the enabled generators; may be zero.
inline Expr rand_poly(std::mt19937& rng, int deg, bool use_x = true,
                      bool use_y = true) {
    Expr acc(0);
    for (int i = 0; i <= deg; ++i)
        for (int j = 0; i + j <= deg; ++j) {
            if (!use_x && i > 0) continue;
            if (!use_y && j > 0) continue;
            if (uniform(rng, 0, 99) < 55) continue;
            Rat c = rand_rat(rng);
            if (c == 0) continue;
            Expr term(c);
            for (int a = 0; a < i; ++a) term = term * ex_x();
            for (int b = 0; b < j; ++b) term = term * ex_y();
            acc = acc + term;
        }
    return acc;
}

inline Expr rand_poly_nonzero(std::mt19937& rng, int deg, bool use_x = true,
                              bool use_y = true) {
    for (;;) {
        Expr e = rand_poly(rng, deg, use_x, use_y);
        if (!e.is_zero_canonical()) return e;
    }
}

inline Expr rand_ratfun(std::mt19937& rng, int deg = 2) {
    return rand_poly(rng, deg) / rand_poly_nonzero(rng, 1);
}

inline Expr rand_ratfun_nonzero(std::mt19937& rng, int deg = 2) {
    return rand_poly_nonzero(rng, deg) / rand_poly_nonzero(rng, 1);
}

inline LPDO rand_lpdo(std::mt19937& rng, int max_order, int deg) {
    LPDO a;
    int d = uniform(rng, 1, max_order);
    for (int i = 0; i <= d; ++i)
        for (int j = 0; i + j <= d; ++j) {
            if (uniform(rng, 0, 99) < 45) continue;
            a.add_term(i, j, rand_poly(rng, deg));
        }
    if (a.zero()) a.add_term(1, 0, Expr(1));
    return a;
}

// Operator whose transverse coefficients all share one factor, with the
// cofactors in the orthogonal variable only, so the ratio condition holds.
inline LPDO rand_condition_lpdo(std::mt19937& rng, Direction dir,
                                int max_order = 3, int deg = 2) {
    bool dx = dir == Direction::dx_family;
    LPDO a = rand_lpdo(rng, max_order, deg);
    LPDO b;
    for (const auto& [bd, e] : a.coeffs()) {
        bool transverse = dx ? bd.first == 0 : bd.second == 0;
        if (!transverse) b.add_term(bd.first, bd.second, e);
    }
    int d = b.zero() ? 2 : b.order();
    Expr common = rand_poly_nonzero(rng, deg);
    for (int j = 0; j <= d; ++j) {
        if (uniform(rng, 0, 99) < 50) continue;
        Expr cj = rand_poly(rng, deg, !dx, dx);
        if (cj.is_zero_canonical()) continue;
        if (dx)
            b.add_term(0, j, cj * common);
        else
            b.add_term(j, 0, cj * common);
    }
    if (b.zero()) b.add_term(1, 1, Expr(1));
    return b;
}

inline bool same_symbol(const LPDO& a, const LPDO& b) {
    PrincipalSymbol sa = principal_symbol(a);
    PrincipalSymbol sb = principal_symbol(b);
    if (sa.order != sb.order || sa.terms.size() != sb.terms.size())
        return false;
    for (const auto& [bd, e] : sa.terms) {
        auto it = sb.terms.find(bd);
        if (it == sb.terms.end()) return false;
        if (!is_zero(e - it->second).zeroish()) return false;
    }
    return true;
}

}  // namespace testgen
