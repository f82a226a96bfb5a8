#pragma once

// Mixed-derivative Wronskians W_{t,s} and the Wronskian form of a Darboux
// operator of bidegree (m, n): coefficients are signed maximal minors of the
// (m+n) x (m+n+1) derivative matrix, divided by the Wronskian one order down.

#include "lpdo.hpp"

#include <vector>

namespace darboux {

struct WronskianSpec {
    int t = 0, s = 0;              // derivative orders in x and in y
    std::vector<Expr> functions;   // must have t + s + 1 entries
};

namespace detail {

inline Expr det(std::vector<std::vector<Expr>> m) {
    size_t n = m.size();
    if (n == 0) return Expr(1);
    if (n == 1) return m[0][0];
    Expr acc(0);
    for (size_t r = 0; r < n; ++r) {
        if (m[r][0].is_zero_canonical()) continue;
        std::vector<std::vector<Expr>> sub;
        sub.reserve(n - 1);
        for (size_t r2 = 0; r2 < n; ++r2) {
            if (r2 == r) continue;
            sub.emplace_back(m[r2].begin() + 1, m[r2].end());
        }
        Expr cof = m[r][0] * det(std::move(sub));
        acc = r % 2 ? acc - cof : acc + cof;
    }
    return acc;
}

// derivative columns of one function: [f, Dx f, .., Dx^t f, Dy f, .., Dy^s f]
inline std::vector<Expr> derivative_row(const Expr& f, int t, int s) {
    std::vector<Expr> row;
    row.reserve(static_cast<size_t>(t + s) + 1);
    row.push_back(f);
    Expr d = f;
    for (int i = 1; i <= t; ++i) {
        d = diff(d, gen_x);
        row.push_back(d);
    }
    d = f;
    for (int j = 1; j <= s; ++j) {
        d = diff(d, gen_y);
        row.push_back(d);
    }
    return row;
}

}  // namespace detail

inline Expr wronskian(const WronskianSpec& spec) {
    size_t n = static_cast<size_t>(spec.t) + static_cast<size_t>(spec.s) + 1;
    if (spec.functions.size() != n)
        throw Error(Errc::size_mismatch, "need t + s + 1 functions",
                    static_cast<long>(spec.functions.size()));
    std::vector<std::vector<Expr>> m;
    m.reserve(n);
    for (const Expr& f : spec.functions) m.push_back(detail::derivative_row(f, spec.t, spec.s));
    return detail::det(std::move(m));
}

// The operator with principal part Dx^m + ... annihilating all m+n given
// functions. Column c of the derivative matrix corresponds to the monomial
// recorded in cols[c]; the coefficient of that monomial is
// (-1)^(m+n) (-1)^c minor_c / W_den where minor_c deletes column c and W_den
// is the Wronskian of bidegree (m-1, n), or (0, n-1) when m == 0.
inline LPDO wronskian_operator(int m, int n, const std::vector<Expr>& psis) {
    size_t rows = static_cast<size_t>(m) + static_cast<size_t>(n);
    if (psis.size() != rows)
        throw Error(Errc::size_mismatch, "need m + n functions",
                    static_cast<long>(psis.size()));
    std::vector<Bidegree> cols;
    cols.push_back({0, 0});
    for (int i = 1; i <= m; ++i) cols.push_back({i, 0});
    for (int j = 1; j <= n; ++j) cols.push_back({0, j});

    std::vector<std::vector<Expr>> mat;
    mat.reserve(rows);
    for (const Expr& f : psis) {
        std::vector<Expr> row;
        row.reserve(cols.size());
        std::vector<Expr> dx_parts = detail::derivative_row(f, m, 0);
        std::vector<Expr> dy_parts = detail::derivative_row(f, 0, n);
        for (const Bidegree& bd : cols)
            row.push_back(bd.first > 0 ? dx_parts[static_cast<size_t>(bd.first)]
                                       : dy_parts[static_cast<size_t>(bd.second)]);
        mat.push_back(std::move(row));
    }

    size_t den_col = m >= 1 ? static_cast<size_t>(m) : cols.size() - 1;
    auto minor = [&](size_t skip) {
        std::vector<std::vector<Expr>> sub;
        sub.reserve(rows);
        for (const auto& row : mat) {
            std::vector<Expr> r;
            r.reserve(rows);
            for (size_t c = 0; c < row.size(); ++c)
                if (c != skip) r.push_back(row[c]);
            sub.push_back(std::move(r));
        }
        return detail::det(std::move(sub));
    };

    Expr den = minor(den_col);
    if (is_zero(den).zeroish())
        throw Error(Errc::denominator_vanishes,
                    "the order-lowered Wronskian of the given functions vanishes");

    LPDO L;
    int outer = (m + n) % 2 ? -1 : 1;
    for (size_t c = 0; c < cols.size(); ++c) {
        int sign = outer * (c % 2 ? -1 : 1);
        Expr coeff = Expr(sign) * minor(c) / den;
        L.add_term(cols[c].first, cols[c].second, coeff);
    }
    return L;
}

}  // namespace darboux
