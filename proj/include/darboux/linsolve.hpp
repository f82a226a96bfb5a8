#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "lpdo.hpp"

namespace darboux {

// Gaussian elimination over the expression field.  Returns one solution with
// free variables set to zero, or nullopt when the system is inconsistent.
// Pivots must test NonZero; probable-zero entries are conservatively treated
// as zero.
inline std::optional<std::vector<Expr>> solve_linear(
    std::vector<std::vector<Expr>> a, std::vector<Expr> b) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows == 0 ? 0 : a[0].size();
    std::vector<std::optional<std::size_t>> pivot_row(cols);
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::optional<std::size_t> p;
        for (std::size_t r = rank; r < rows; ++r) {
            if (is_zero(a[r][c]).kind == ZeroKind::nonzero) {
                p = r;
                break;
            }
        }
        if (!p) continue;
        std::swap(a[*p], a[rank]);
        std::swap(b[*p], b[rank]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank) continue;
            if (a[r][c].is_zero_canonical()) continue;
            Expr f = a[r][c] / a[rank][c];
            for (std::size_t cc = c; cc < cols; ++cc)
                a[r][cc] = a[r][cc] - f * a[rank][cc];
            b[r] = b[r] - f * b[rank];
        }
        pivot_row[c] = rank;
        ++rank;
    }
    for (std::size_t r = rank; r < rows; ++r)
        if (!is_zero(b[r]).zeroish()) return std::nullopt;
    std::vector<Expr> x(cols, Expr(0));
    for (std::size_t c = 0; c < cols; ++c)
        if (pivot_row[c]) x[c] = b[*pivot_row[c]] / a[*pivot_row[c]][c];
    return x;
}

namespace detail {

inline std::vector<Bidegree> bidegrees_up_to(int d) {
    std::vector<Bidegree> out;
    for (int i = 0; i <= d; ++i)
        for (int j = 0; i + j <= d; ++j) out.push_back({i, j});
    return out;
}

}  // namespace detail

// Coefficient-matching oracle: with M and N fixed, finds L1 of order at most
// deg(L) with N*L == L1*M by solving the linear system that matching
// coefficients of the intertwining identity imposes.  Composition is
// left-linear over the field, so each unknown coefficient of L1 enters
// linearly through compose(D^a, M).
inline std::optional<LPDO> complete_l1(const LPDO& l, const LPDO& m,
                                       const LPDO& n) {
    std::vector<Bidegree> unknowns = detail::bidegrees_up_to(l.order());
    LPDO rhs = compose(n, l);

    std::vector<LPDO> basis;
    std::set<Bidegree> support;
    for (const auto& [i, j] : unknowns) {
        basis.push_back(compose(LPDO::monomial(i, j, Expr(1)), m));
        for (const auto& [bd, e] : basis.back().coeffs()) {
            (void)e;
            support.insert(bd);
        }
    }
    for (const auto& [bd, e] : rhs.coeffs()) {
        (void)e;
        support.insert(bd);
    }

    std::vector<std::vector<Expr>> rows;
    std::vector<Expr> b;
    for (const Bidegree& bd : support) {
        std::vector<Expr> row;
        for (std::size_t k = 0; k < unknowns.size(); ++k)
            row.push_back(basis[k].coeff(bd.first, bd.second));
        rows.push_back(std::move(row));
        b.push_back(rhs.coeff(bd.first, bd.second));
    }

    auto sol = solve_linear(std::move(rows), std::move(b));
    if (!sol) return std::nullopt;
    LPDO out;
    for (std::size_t k = 0; k < unknowns.size(); ++k)
        out.add_term(unknowns[k].first, unknowns[k].second, (*sol)[k]);
    return out;
}

// Full completion: given L and a candidate transformation M, searches for a
// cotransformation N and a transformed operator L1 with N*L == L1*M.  N is
// normalized to share M's principal symbol; its lower-order coefficients and
// all of L1 are the unknowns of one joint linear system.
inline std::optional<std::pair<LPDO, LPDO>> complete_intertwining(
    const LPDO& l, const LPDO& m) {
    int dl = l.order();
    int dm = m.order();
    if (dl < 0 || dm < 0) return std::nullopt;

    LPDO ntop;
    for (const auto& [bd, e] : m.coeffs())
        if (bd.first + bd.second == dm) ntop.add_term(bd.first, bd.second, e);

    std::vector<Bidegree> n_unknowns = detail::bidegrees_up_to(dm - 1);
    std::vector<Bidegree> l1_unknowns = detail::bidegrees_up_to(dl);

    // compose(N, L) - compose(L1, M) = 0 with N = ntop + sum n_a D^a:
    // sum_a n_a [D^a L] - sum_b c_b [D^b M] = -[ntop L], matched per bidegree.
    std::vector<LPDO> basis;
    for (const auto& [i, j] : n_unknowns)
        basis.push_back(compose(LPDO::monomial(i, j, Expr(1)), l));
    for (const auto& [i, j] : l1_unknowns) {
        basis.push_back(
            scale(compose(LPDO::monomial(i, j, Expr(1)), m), Expr(-1)));
    }
    LPDO rhs = scale(compose(ntop, l), Expr(-1));

    std::set<Bidegree> support;
    for (const LPDO& t : basis)
        for (const auto& [bd, e] : t.coeffs()) {
            (void)e;
            support.insert(bd);
        }
    for (const auto& [bd, e] : rhs.coeffs()) {
        (void)e;
        support.insert(bd);
    }

    std::vector<std::vector<Expr>> rows;
    std::vector<Expr> b;
    for (const Bidegree& bd : support) {
        std::vector<Expr> row;
        for (const LPDO& t : basis) row.push_back(t.coeff(bd.first, bd.second));
        rows.push_back(std::move(row));
        b.push_back(rhs.coeff(bd.first, bd.second));
    }

    auto sol = solve_linear(std::move(rows), std::move(b));
    if (!sol) return std::nullopt;
    LPDO n = ntop;
    std::size_t k = 0;
    for (const auto& [i, j] : n_unknowns) n.add_term(i, j, (*sol)[k++]);
    LPDO l1;
    for (const auto& [i, j] : l1_unknowns) l1.add_term(i, j, (*sol)[k++]);
    return std::make_pair(n, l1);
}

}  // namespace darboux
