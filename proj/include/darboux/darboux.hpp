#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "wronskian.hpp"

namespace darboux {

enum class HoldVerdict { exact, probable, fails };

// Outcome of the coefficient test that governs first-order transformations
// with principal part D_x (dx_family) or D_y (dy_family).  The ratio of any
// two nonzero transverse coefficients must not depend on the direction
// variable.
struct ConditionReport {
    Direction direction = Direction::dx_family;
    HoldVerdict holds = HoldVerdict::exact;
    // (index, pivot index) -> the ratio that was tested.
    std::map<std::pair<int, int>, Expr> witnesses;
    // On failure: the offending pair and the nonzero derivative of its ratio.
    std::optional<std::pair<int, int>> failing_pair;
    std::optional<Expr> counterexample;

    bool ok() const { return holds != HoldVerdict::fails; }
};

struct InvertibilityClass {
    enum class Kind { invertible, finite_kernel, infinite_kernel };

    Kind kind = Kind::invertible;
    int kernel_dim = 0;  // meaningful for finite_kernel only

    bool invertible() const { return kind == Kind::invertible; }
};

struct DarbouxResult {
    LPDO M;       // transformation operator
    LPDO N;       // cotransformation operator
    LPDO L1;      // transformed operator, N*L == L1*M
    Expr gauge_used = Expr(1);
    InvertibilityClass invertibility;
    EqualReport verification;
    bool probable = false;  // some step was certified by sampling only
};

struct LaplaceInvariants {
    Expr h;  // a_x + a*b - c
    Expr k;  // b_y + a*b - c
};

struct Theorem51Result {
    int k_required = 0;
    LPDO M;
    DarbouxResult result;
};

namespace detail {

// Coefficients of the pure transverse powers: a_{0j} keyed by j for the
// dx family, a_{i0} keyed by i for the dy family.
inline std::map<int, Expr> transverse_coeffs(const LPDO& a, Direction dir) {
    std::map<int, Expr> out;
    for (const auto& [bd, e] : a.coeffs()) {
        if (dir == Direction::dx_family && bd.first == 0)
            out.emplace(bd.second, e);
        else if (dir == Direction::dy_family && bd.second == 0)
            out.emplace(bd.first, e);
    }
    return out;
}

inline InvertibilityClass classify_transverse(const std::map<int, Expr>& pures) {
    InvertibilityClass c;
    if (pures.empty()) {
        c.kind = InvertibilityClass::Kind::infinite_kernel;
        return c;
    }
    int top = pures.rbegin()->first;
    if (top == 0) {
        c.kind = InvertibilityClass::Kind::invertible;
    } else {
        c.kind = InvertibilityClass::Kind::finite_kernel;
        c.kernel_dim = top;
    }
    return c;
}

}  // namespace detail

// Tests whether a first-order Darboux transformation with M = D_x + m
// (resp. D_y + m) exists for the given operator: every ratio of nonzero
// transverse coefficients must be free of the direction variable.  Vacuously
// holds when at most one such coefficient is present.
inline ConditionReport check_condition(const LPDO& a, Direction dir) {
    ConditionReport rep;
    rep.direction = dir;
    auto pures = detail::transverse_coeffs(a, dir);
    if (pures.size() <= 1) return rep;

    int dvar = direction_var(dir);
    int pivot = pures.rbegin()->first;
    const Expr& apiv = pures.rbegin()->second;
    for (const auto& [j, aj] : pures) {
        if (j == pivot) continue;
        Expr ratio = aj / apiv;
        rep.witnesses.emplace(std::make_pair(j, pivot), ratio);
        try {
            ZeroVerdict zv = is_zero(diff(ratio, dvar));
            if (zv.kind == ZeroKind::nonzero) {
                rep.holds = HoldVerdict::fails;
                rep.failing_pair = std::make_pair(j, pivot);
                rep.counterexample = diff(ratio, dvar);
                return rep;
            }
            if (zv.probable()) rep.holds = HoldVerdict::probable;
        } catch (const Error& e) {
            if (e.code != Errc::undecided_after_retries) throw;
            rep.holds = HoldVerdict::probable;
        }
    }
    return rep;
}

// Builds the transformation M = D_dir, the cotransformation N = D_dir + n
// and the transformed operator L1 with N*L == L1*M.  The coefficient n is
// pinned down by the top transverse coefficient; every other transverse
// coefficient must satisfy the same first-order equation, otherwise no such
// transformation exists and ConditionViolated is thrown.
inline DarbouxResult construct(const LPDO& a, Direction dir) {
    auto pures = detail::transverse_coeffs(a, dir);
    int dvar = direction_var(dir);
    bool probable = false;

    Expr n(0);
    if (!pures.empty()) {
        const Expr& apiv = pures.rbegin()->second;
        n = -diff(apiv, dvar) / apiv;
    }
    for (const auto& [j, aj] : pures) {
        ZeroVerdict zv = is_zero(n * aj + diff(aj, dvar));
        if (zv.kind == ZeroKind::nonzero)
            throw Error(Errc::condition_violated,
                        "transverse coefficient does not satisfy n*a + a' = 0", j);
        if (zv.probable()) probable = true;
    }

    DarbouxResult res;
    res.M = direction_op(dir);
    res.N = res.M;
    res.N.add_term(0, 0, n);
    LPDO p = compose(res.N, a);
    auto [q, r] = right_divide(p, dir);
    if (!r.zero())
        throw Error(Errc::condition_violated,
                    "right division by the principal part leaves a remainder");
    res.L1 = q;
    res.invertibility = detail::classify_transverse(pures);
    res.verification = equal(compose(res.N, a), compose(res.L1, res.M));
    res.probable = probable || res.verification.verdict == EqVerdict::probable;
    return res;
}

// Kernel dimension of the constructed transformation, assuming the existence
// condition holds; throws NotApplicable otherwise.  The kernel of M restricted
// to ker L is trivial exactly when the only transverse coefficient is the
// free term.
inline InvertibilityClass classify(const LPDO& a, Direction dir) {
    ConditionReport rep = check_condition(a, dir);
    if (!rep.ok())
        throw Error(Errc::not_applicable,
                    "no first-order transformation exists in this direction");
    return detail::classify_transverse(detail::transverse_coeffs(a, dir));
}

namespace detail {

inline DarbouxResult conjugate_back(const DarbouxResult& gauged, const LPDO& a,
                                    const Expr& g, bool extra_probable) {
    Expr ginv = Expr(1) / g;
    DarbouxResult res;
    res.M = gauge(gauged.M, ginv);
    res.N = gauge(gauged.N, ginv);
    res.L1 = gauge(gauged.L1, ginv);
    res.gauge_used = g;
    res.invertibility = gauged.invertibility;
    res.verification = equal(compose(res.N, a), compose(res.L1, res.M));
    res.probable = gauged.probable || extra_probable ||
                   res.verification.verdict == EqVerdict::probable;
    return res;
}

}  // namespace detail

// Darboux transformation determined by a kernel element: gauges the operator
// by psi1, constructs the transformation for the gauged operator (whose
// kernel contains 1), and conjugates everything back.  M annihilates psi1.
inline DarbouxResult darboux_from_solution(const LPDO& a, const Expr& psi1,
                                           Direction dir) {
    if (is_zero(psi1).zeroish())
        throw Error(Errc::zero_gauge, "kernel element must be nonzero");
    ZeroVerdict in_ker = is_zero(apply(a, psi1));
    if (in_ker.kind == ZeroKind::nonzero)
        throw Error(Errc::not_in_kernel, "L(psi1) is not zero");

    LPDO ag = gauge(a, psi1);
    ConditionReport rep = check_condition(ag, dir);
    if (!rep.ok())
        throw Error(Errc::condition_violated,
                    "gauged operator fails the coefficient condition");
    DarbouxResult gauged = construct(ag, dir);
    return detail::conjugate_back(
        gauged, a, psi1,
        in_ker.probable() || rep.holds == HoldVerdict::probable);
}

// Wronskian-style sufficiency test: an operator of order d admits a
// transformation with M = D_x - psi1_x/psi1 given k kernel elements whose
// ratios T_i = psi_i/psi1 depend on y alone and have a nonvanishing
// Wronskian, where k = d when a_{0d} != 0 and k = d - 1 otherwise.  The dy
// family mirrors the roles of x and y.
inline Theorem51Result theorem51_check(const LPDO& a,
                                       const std::vector<Expr>& psis,
                                       Direction dir) {
    int d = a.order();
    bool top = dir == Direction::dx_family ? a.has_term(0, d) : a.has_term(d, 0);
    int k = top ? d : d - 1;
    int required = k > 1 ? k : 1;
    if (static_cast<int>(psis.size()) < required)
        throw Error(Errc::too_few_solutions,
                    "need at least " + std::to_string(required) +
                        " kernel elements",
                    required);

    int ortho = dir == Direction::dx_family ? gen_y : gen_x;
    bool probable = false;
    for (std::size_t i = 0; i < psis.size(); ++i) {
        if (is_zero(psis[i]).zeroish())
            throw Error(Errc::zero_gauge, "kernel element must be nonzero",
                        static_cast<long>(i) + 1);
        ZeroVerdict zv = is_zero(apply(a, psis[i]));
        if (zv.kind == ZeroKind::nonzero)
            throw Error(Errc::not_in_kernel, "psi is not in the kernel",
                        static_cast<long>(i) + 1);
        if (zv.probable()) probable = true;
    }

    std::vector<Expr> ts;
    ts.push_back(Expr(1));
    for (int i = 1; i < required; ++i) {
        Expr t = psis[i] / psis[0];
        ZeroVerdict zv = depends_only_on_verdict(t, ortho);
        if (zv.kind == ZeroKind::nonzero)
            throw Error(Errc::ratio_not_separated,
                        "psi_i/psi_1 depends on the direction variable", i + 1);
        if (zv.probable()) probable = true;
        ts.push_back(t);
    }

    WronskianSpec wspec;
    if (dir == Direction::dx_family) {
        wspec.t = 0;
        wspec.s = required - 1;
    } else {
        wspec.t = required - 1;
        wspec.s = 0;
    }
    wspec.functions = ts;
    if (is_zero(wronskian(wspec)).zeroish())
        throw Error(Errc::wronskian_vanishes,
                    "the Wronskian of 1, T_2, ..., T_k vanishes");

    Theorem51Result out;
    out.k_required = required;
    out.result = darboux_from_solution(a, psis[0], dir);
    out.result.probable = out.result.probable || probable;
    out.M = out.result.M;
    return out;
}

// Laplace invariants of a hyperbolic operator in the normal form
// D_x D_y + a D_x + b D_y + c.
inline LaplaceInvariants laplace_invariants(const LPDO& a) {
    for (const auto& [bd, e] : a.coeffs()) {
        (void)e;
        bool allowed = bd == Bidegree{1, 1} || bd == Bidegree{1, 0} ||
                       bd == Bidegree{0, 1} || bd == Bidegree{0, 0};
        if (!allowed)
            throw Error(Errc::not_hyperbolic_normal_form,
                        "operator has a term outside Dx*Dy + a*Dx + b*Dy + c");
    }
    if (!(a.coeff(1, 1) - Expr(1)).is_zero_canonical())
        throw Error(Errc::not_hyperbolic_normal_form,
                    "the coefficient of Dx*Dy must be 1");
    Expr ca = a.coeff(1, 0);
    Expr cb = a.coeff(0, 1);
    Expr cc = a.coeff(0, 0);
    LaplaceInvariants inv;
    inv.h = diff(ca, gen_x) + ca * cb - cc;
    inv.k = diff(cb, gen_y) + ca * cb - cc;
    return inv;
}

namespace detail {

inline std::pair<Rat, Mono> split_exponent(const Mono& m, int var) {
    Rat e(0);
    Mono rest;
    for (const auto& [g, p] : m.f) {
        if (g == var)
            e = p;
        else
            rest.f.push_back({g, p});
    }
    return {e, rest};
}

// Solves g'/g = -m in closed form when m, as a rational form, is a sum of
// terms c_t(y) * x^{alpha_t} over a denominator x^p * d(y): integrates
// term by term, sending exponent -1 to a logarithm.  Mirrored for the dy
// family.  Validity is certified afterwards by the caller.
inline Expr synthesize_gauge(const Expr& m, Direction dir) {
    int dvar = direction_var(dir);
    const RatForm& rf = m.rf();

    std::optional<Rat> p;
    Poly dpoly;
    for (const auto& [mono, c] : rf.den.t) {
        auto [e, rest] = split_exponent(mono, dvar);
        if (!p)
            p = e;
        else if (*p != e)
            throw Error(Errc::gauge_not_representable,
                        "denominator is not a monomial in the direction "
                        "variable times a cofactor");
        dpoly.t.emplace(rest, c);
    }
    Expr dfree(rf_make(dpoly, Poly::one()));
    if (!diff(dfree, dvar).is_zero_canonical())
        throw Error(Errc::gauge_not_representable,
                    "denominator cofactor depends on the direction variable");

    Expr xv = ex_var(dvar);
    Expr upoly(0);
    Expr logc(0);
    for (const auto& [mono, c] : rf.num.t) {
        auto [e, rest] = split_exponent(mono, dvar);
        Poly single;
        single.t.emplace(rest, c);
        Expr coeff = Expr(rf_make(single, Poly::one())) / dfree;
        Rat arel = e - *p;
        if (arel == -1) {
            logc = logc + coeff;
        } else {
            upoly = upoly + coeff * pow(xv, arel + 1) / Expr(arel + 1);
        }
    }

    Expr g = exp(Expr(0) - upoly);
    Rat rc;
    if (logc.rf().is_constant(&rc)) {
        if (rc != 0) g = g * pow(xv, -rc);
    } else {
        g = g * exp(Expr(0) - logc * log(xv));
    }
    return g;
}

}  // namespace detail

// Classical Laplace transformation of D_x D_y + a D_x + b D_y + c.  For the
// dx family this is the Darboux transformation with M = D_x + b; it exists
// and is invertible iff the invariant k is nonzero (h for the dy family).
// The gauge g with g'/g = -b (resp. -a) is synthesized when not supplied.
inline DarbouxResult laplace_transformation(
    const LPDO& a, Direction dir,
    const std::optional<Expr>& gauge_hint = std::nullopt) {
    LaplaceInvariants inv = laplace_invariants(a);
    const Expr& rel = dir == Direction::dx_family ? inv.k : inv.h;
    if (is_zero(rel).zeroish())
        throw Error(Errc::zero_invariant,
                    dir == Direction::dx_family
                        ? "the invariant k = b_y + a*b - c vanishes"
                        : "the invariant h = a_x + a*b - c vanishes");

    int dvar = direction_var(dir);
    Expr m = dir == Direction::dx_family ? a.coeff(0, 1) : a.coeff(1, 0);
    Expr g(1);
    bool probable = false;
    if (gauge_hint) {
        g = *gauge_hint;
        if (is_zero(g).zeroish())
            throw Error(Errc::zero_gauge, "gauge must be nonzero");
        ZeroVerdict zv = is_zero(diff(g, dvar) + m * g);
        if (zv.kind == ZeroKind::nonzero)
            throw Error(Errc::gauge_not_representable,
                        "supplied gauge does not satisfy g' + m*g = 0");
        probable = zv.probable();
    } else {
        g = detail::synthesize_gauge(m, dir);
        if (!(diff(g, dvar) + m * g).is_zero_canonical())
            throw Error(Errc::gauge_not_representable,
                        "no closed-form gauge with g' + m*g = 0");
    }

    DarbouxResult gauged = construct(gauge(a, g), dir);
    DarbouxResult res = detail::conjugate_back(gauged, a, g, probable);
    if (!res.invertibility.invertible())
        throw Error(Errc::condition_violated,
                    "nonzero invariant should yield an invertible "
                    "transformation");
    return res;
}

// Checks N*L == L1*M.
inline EqualReport verify_intertwining(const LPDO& n, const LPDO& l,
                                       const LPDO& l1, const LPDO& m) {
    return equal(compose(n, l), compose(l1, m));
}

}  // namespace darboux
