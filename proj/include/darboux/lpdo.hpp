#pragma once

// The noncommutative ring K[Dx,Dy]: operators in the normal form (2.1),
// coefficients stored to the left of the derivations. Composition renormalizes
// through the binomial Leibniz rule
//   Dx^i Dy^j o f = sum C(i,a) C(j,b) d_x^a d_y^b(f) Dx^(i-a) Dy^(j-b).

#include "expr.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace darboux {

using Bidegree = std::pair<int, int>;  // (i, j): powers of Dx, Dy

class LPDO {
  public:
    LPDO() = default;

    static LPDO identity() { return monomial(0, 0, Expr(1)); }
    static LPDO dx() { return monomial(1, 0, Expr(1)); }
    static LPDO dy() { return monomial(0, 1, Expr(1)); }
    static LPDO multiplication(const Expr& f) { return monomial(0, 0, f); }
    static LPDO monomial(int i, int j, const Expr& coeff) {
        LPDO r;
        r.add_term(i, j, coeff);
        return r;
    }

    bool zero() const { return c_.empty(); }
    int order() const {
        int d = -1;
        for (const auto& [bd, e] : c_) d = std::max(d, bd.first + bd.second);
        return d;
    }
    const std::map<Bidegree, Expr>& coeffs() const { return c_; }
    Expr coeff(int i, int j) const {
        auto it = c_.find({i, j});
        return it == c_.end() ? Expr(0) : it->second;
    }
    bool has_term(int i, int j) const { return c_.find({i, j}) != c_.end(); }

    // Accumulates and prunes: coefficients whose zero test passes are removed,
    // so present coefficients are exactly the NonZero ones.
    void add_term(int i, int j, const Expr& e) {
        auto it = c_.find({i, j});
        Expr sum = it == c_.end() ? e : it->second + e;
        if (it != c_.end()) c_.erase(it);
        if (sum.is_zero_canonical()) return;
        ZeroVerdict zv = is_zero(sum);
        if (zv.zeroish()) return;
        c_.emplace(Bidegree{i, j}, sum);
    }

  private:
    std::map<Bidegree, Expr> c_;
};

inline LPDO add(const LPDO& a, const LPDO& b) {
    LPDO r = a;
    for (const auto& [bd, e] : b.coeffs()) r.add_term(bd.first, bd.second, e);
    return r;
}

inline LPDO scale(const LPDO& a, const Expr& f) {
    LPDO r;
    for (const auto& [bd, e] : a.coeffs()) r.add_term(bd.first, bd.second, f * e);
    return r;
}

inline LPDO operator+(const LPDO& a, const LPDO& b) { return add(a, b); }
inline LPDO operator-(const LPDO& a, const LPDO& b) { return add(a, scale(b, Expr(-1))); }

namespace detail {

inline std::vector<std::vector<Int>> binomials(int n) {
    std::vector<std::vector<Int>> c(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        c[i].assign(static_cast<size_t>(i) + 1, Int(1));
        for (int k = 1; k < i; ++k) c[i][k] = c[i - 1][k - 1] + c[i - 1][k];
    }
    return c;
}

// partials[a][b] = d_x^a d_y^b (f)
inline std::vector<std::vector<Expr>> partial_table(const Expr& f, int imax, int jmax) {
    std::vector<std::vector<Expr>> p(static_cast<size_t>(imax) + 1);
    for (int a = 0; a <= imax; ++a) {
        p[a].resize(static_cast<size_t>(jmax) + 1);
        p[a][0] = a == 0 ? f : diff(p[a - 1][0], gen_x);
        for (int b = 1; b <= jmax; ++b) p[a][b] = diff(p[a][b - 1], gen_y);
    }
    return p;
}

}  // namespace detail

inline LPDO compose(const LPDO& a, const LPDO& b) {
    int imax = 0, jmax = 0;
    for (const auto& [bd, e] : a.coeffs()) {
        imax = std::max(imax, bd.first);
        jmax = std::max(jmax, bd.second);
    }
    auto binom = detail::binomials(std::max(imax, jmax));
    LPDO r;
    for (const auto& [bdb, cb] : b.coeffs()) {
        auto partials = detail::partial_table(cb, imax, jmax);
        for (const auto& [bda, ca] : a.coeffs()) {
            for (int al = 0; al <= bda.first; ++al)
                for (int be = 0; be <= bda.second; ++be) {
                    Expr term = partials[al][be];
                    if (term.is_zero_canonical()) continue;
                    Rat coef(binom[bda.first][al] * binom[bda.second][be]);
                    r.add_term(bda.first - al + bdb.first, bda.second - be + bdb.second,
                               ca * Expr(coef) * term);
                }
        }
    }
    return r;
}

inline Expr apply(const LPDO& a, const Expr& f) {
    int imax = 0, jmax = 0;
    for (const auto& [bd, e] : a.coeffs()) {
        imax = std::max(imax, bd.first);
        jmax = std::max(jmax, bd.second);
    }
    auto partials = detail::partial_table(f, imax, jmax);
    Expr acc(0);
    for (const auto& [bd, e] : a.coeffs()) acc = acc + e * partials[bd.first][bd.second];
    return acc;
}

struct PrincipalSymbol {
    int order;
    std::map<Bidegree, Expr> terms;  // total degree == order
};

inline PrincipalSymbol principal_symbol(const LPDO& a) {
    if (a.zero()) throw Error(Errc::zero_operator, "principal symbol of the zero operator");
    PrincipalSymbol s;
    s.order = a.order();
    for (const auto& [bd, e] : a.coeffs())
        if (bd.first + bd.second == s.order) s.terms.emplace(bd, e);
    return s;
}

inline LPDO gauge(const LPDO& a, const Expr& g) {
    if (is_zero(g).zeroish()) throw Error(Errc::zero_gauge, "gauge element must be nonzero");
    return compose(compose(LPDO::multiplication(Expr(1) / g), a), LPDO::multiplication(g));
}

enum class Direction { dx_family, dy_family };

inline int direction_var(Direction d) { return d == Direction::dx_family ? gen_x : gen_y; }
inline LPDO direction_op(Direction d) {
    return d == Direction::dx_family ? LPDO::dx() : LPDO::dy();
}

// A = Q o D_dir + R with R free of D_dir; both unique, and exact because
// composing with D_dir from the right is a plain bidegree shift.
inline std::pair<LPDO, LPDO> right_divide(const LPDO& a, Direction dir) {
    LPDO q, r;
    for (const auto& [bd, e] : a.coeffs()) {
        int along = dir == Direction::dx_family ? bd.first : bd.second;
        if (along >= 1) {
            int i = dir == Direction::dx_family ? bd.first - 1 : bd.first;
            int j = dir == Direction::dx_family ? bd.second : bd.second - 1;
            q.add_term(i, j, e);
        } else {
            r.add_term(bd.first, bd.second, e);
        }
    }
    return {q, r};
}

enum class EqVerdict { exact, probable, not_equal };

struct EqualReport {
    EqVerdict verdict = EqVerdict::exact;
    std::optional<Bidegree> differs_at;
    std::optional<Point> witness;
    bool passed() const { return verdict != EqVerdict::not_equal; }
};

inline EqualReport equal(const LPDO& a, const LPDO& b) {
    EqualReport rep;
    std::map<Bidegree, Expr> merged = a.coeffs();
    for (const auto& [bd, e] : b.coeffs())
        if (!merged.count(bd)) merged.emplace(bd, Expr(0));
    for (const auto& [bd, unused] : merged) {
        ZeroVerdict zv = is_zero(a.coeff(bd.first, bd.second) - b.coeff(bd.first, bd.second));
        if (zv.kind == ZeroKind::nonzero) {
            rep.verdict = EqVerdict::not_equal;
            rep.differs_at = bd;
            rep.witness = zv.witness;
            return rep;
        }
        if (zv.probable()) rep.verdict = EqVerdict::probable;
    }
    return rep;
}

}  // namespace darboux
