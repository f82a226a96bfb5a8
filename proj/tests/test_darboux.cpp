#include <darboux/darboux.hpp>
#include <darboux/linsolve.hpp>
#include <darboux/syntax.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "gen.hpp"

#include <functional>

using namespace darboux;
using testgen::rand_condition_lpdo;
using testgen::rand_poly_nonzero;
using testgen::same_symbol;

namespace {

LPDO parse_op(const std::string& s) { return parse_operator(s); }

LPDO op_4_3() { return parse_op("Dx*Dy^2 + Dx^2 + x*Dx + 1"); }

LPDO op_5_3() {
    return parse_op("Dx^2*Dy + Dx*Dy^2 - (1/x)*Dy^2 + Dy");
}

// third-order operator with the right factor Dx - 1 applied twice,
// so exp(x+y) and y*exp(x+y) are kernel elements
LPDO op_double_factor() {
    LPDO inner = LPDO::dx();
    inner.add_term(0, 0, Expr(-1));
    return compose(LPDO::dy(), compose(inner, inner));
}

// hyperbolic normal form with exp(x+y) in the kernel
LPDO op_hyperbolic_exp() {
    LPDO l;
    l.add_term(1, 1, Expr(1));
    l.add_term(1, 0, ex_x());
    l.add_term(0, 1, ex_y());
    l.add_term(0, 0, Expr(0) - Expr(1) - ex_x() - ex_y());
    return l;
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code;
    }
    throw std::logic_error("expected a library error");
}

}  // namespace

TEST_CASE("coefficient condition: vacuous, separated and failing cases") {
    set_zero_seed(12345);

    ConditionReport vac = check_condition(op_4_3(), Direction::dx_family);
    CHECK(vac.holds == HoldVerdict::exact);
    CHECK(vac.witnesses.empty());

    ConditionReport none = check_condition(parse_op("Dx*Dy"),
                                           Direction::dx_family);
    CHECK(none.holds == HoldVerdict::exact);

    LPDO sep = parse_op("Dx + y^2*Dy + y*Dy^2");
    ConditionReport ok = check_condition(sep, Direction::dx_family);
    CHECK(ok.holds == HoldVerdict::exact);
    REQUIRE(ok.witnesses.count({1, 2}) == 1);
    CHECK((ok.witnesses.at({1, 2}) - ex_y()).is_zero_canonical());

    ConditionReport bad = check_condition(op_5_3(), Direction::dx_family);
    CHECK(bad.holds == HoldVerdict::fails);
    REQUIRE(bad.failing_pair.has_value());
    CHECK(*bad.failing_pair == std::make_pair(1, 2));
    REQUIRE(bad.counterexample.has_value());
    CHECK(is_zero(*bad.counterexample).kind == ZeroKind::nonzero);
}

TEST_CASE("construction reproduces the worked divisions") {
    set_zero_seed(12345);

    DarbouxResult a = construct(op_4_3(), Direction::dx_family);
    CHECK(equal(a.L1, parse_op("Dx*Dy^2 + Dx^2 + x*Dx + 2")).verdict ==
          EqVerdict::exact);
    CHECK(equal(a.N, LPDO::dx()).verdict == EqVerdict::exact);
    CHECK(equal(a.M, LPDO::dx()).verdict == EqVerdict::exact);
    CHECK(a.invertibility.invertible());
    CHECK(a.verification.verdict == EqVerdict::exact);
    CHECK(!a.probable);

    DarbouxResult b = construct(parse_op("Dx*Dy + 1"), Direction::dx_family);
    CHECK(equal(b.L1, parse_op("Dx*Dy + 1")).verdict == EqVerdict::exact);

    DarbouxResult c = construct(parse_op("Dx^2 + x*Dx"), Direction::dx_family);
    CHECK(equal(c.L1, parse_op("Dx^2 + x*Dx + 1")).verdict == EqVerdict::exact);
    CHECK(c.invertibility.kind == InvertibilityClass::Kind::infinite_kernel);

    CHECK(code_of([] { construct(op_5_3(), Direction::dx_family); }) ==
          Errc::condition_violated);
}

TEST_CASE("constructed transformations satisfy the determining equations") {
    std::mt19937 rng(57);
    set_zero_seed(12345);
    int done = 0;
    while (done < 10) {
        Direction dir =
            done % 2 ? Direction::dy_family : Direction::dx_family;
        LPDO l = rand_condition_lpdo(rng, dir);
        if (check_condition(l, dir).holds == HoldVerdict::fails) continue;
        DarbouxResult res = construct(l, dir);
        Expr n = res.N.coeff(0, 0);
        for (const auto& [bd, e] : l.coeffs()) {
            bool transverse =
                dir == Direction::dx_family ? bd.first == 0 : bd.second == 0;
            if (!transverse) continue;
            CHECK(is_zero(n * e + diff(e, direction_var(dir))).zeroish());
        }
        CHECK(res.M.order() == 1);
        CHECK(res.N.order() == 1);
        CHECK(res.L1.order() == l.order());
        CHECK(same_symbol(res.L1, l));
        CHECK(res.verification.verdict == EqVerdict::exact);
        ++done;
    }
}

TEST_CASE("probabilistic coefficient identities propagate to the result") {
    set_zero_seed(12345);
    Expr x = ex_x();
    LPDO p;
    p.add_term(1, 0, Expr(1));
    p.add_term(0, 1, Expr(0) - cos(Expr(2) * x) / 2 - sin(x) * sin(x));
    p.add_term(0, 2, Expr(1));

    ConditionReport rep = check_condition(p, Direction::dx_family);
    CHECK(rep.holds == HoldVerdict::probable);

    DarbouxResult res = construct(p, Direction::dx_family);
    CHECK(res.probable);
    CHECK(res.verification.passed());
}

TEST_CASE("kernel-dimension trichotomy") {
    set_zero_seed(12345);

    CHECK(classify(op_4_3(), Direction::dx_family).invertible());

    InvertibilityClass fin1 =
        classify(gauge(op_5_3(), ex_x()), Direction::dx_family);
    CHECK(fin1.kind == InvertibilityClass::Kind::finite_kernel);
    CHECK(fin1.kernel_dim == 1);

    InvertibilityClass fin2 =
        classify(parse_op("Dx^2 + Dy + y*Dy^2"), Direction::dx_family);
    CHECK(fin2.kind == InvertibilityClass::Kind::finite_kernel);
    CHECK(fin2.kernel_dim == 2);

    CHECK(classify(parse_op("Dx*Dy"), Direction::dx_family).kind ==
          InvertibilityClass::Kind::infinite_kernel);

    CHECK(code_of([] { classify(op_5_3(), Direction::dx_family); }) ==
          Errc::not_applicable);

    // invertible means the free coefficient, i.e. L(1), is nonzero
    CHECK(is_zero(apply(op_4_3(), Expr(1))).kind == ZeroKind::nonzero);
}

TEST_CASE("finite kernels restrict to an ODE of matching order") {
    set_zero_seed(12345);
    for (const char* src : {"Dx^2 + Dy + y*Dy^2", "Dx + y^2*Dy + y*Dy^2"}) {
        LPDO l = parse_op(src);
        InvertibilityClass cls = classify(l, Direction::dx_family);
        REQUIRE(cls.kind == InvertibilityClass::Kind::finite_kernel);
        LPDO ode;
        for (const auto& [bd, e] : l.coeffs())
            if (bd.first == 0) ode.add_term(0, bd.second, e);
        CHECK(ode.order() == cls.kernel_dim);
        CHECK(is_zero(ode.coeff(0, cls.kernel_dim)).kind == ZeroKind::nonzero);
    }
}

TEST_CASE("transformation from a kernel element, exact worked case") {
    set_zero_seed(12345);
    Expr x = ex_x();
    LPDO l = op_5_3();

    CHECK(equal(gauge(l, x),
                parse_op("Dx^2*Dy + Dx*Dy^2 + (2/x)*Dx*Dy + Dy"))
              .verdict == EqVerdict::exact);

    DarbouxResult res = darboux_from_solution(l, x, Direction::dx_family);
    LPDO expect_m = LPDO::dx();
    expect_m.add_term(0, 0, Expr(0) - Expr(1) / x);
    CHECK(equal(res.M, expect_m).verdict == EqVerdict::exact);
    CHECK(equal(res.N, expect_m).verdict == EqVerdict::exact);
    CHECK(equal(res.L1,
                parse_op("Dx^2*Dy + Dx*Dy^2 - (1/x)*Dy^2 + (1 - 2/x^2)*Dy"))
              .verdict == EqVerdict::exact);
    CHECK(res.invertibility.kind == InvertibilityClass::Kind::finite_kernel);
    CHECK(res.invertibility.kernel_dim == 1);
    CHECK(res.verification.verdict == EqVerdict::exact);
    CHECK((res.gauge_used - x).is_zero_canonical());
}

TEST_CASE("kernel-element preconditions are enforced") {
    set_zero_seed(12345);
    CHECK(code_of([] {
              darboux_from_solution(op_4_3(), Expr(0), Direction::dx_family);
          }) == Errc::zero_gauge);
    CHECK(code_of([] {
              darboux_from_solution(op_4_3(), ex_x(), Direction::dx_family);
          }) == Errc::not_in_kernel);
}

TEST_CASE("kernel element whose gauged operator fails the condition") {
    set_zero_seed(12345);
    Expr x = ex_x(), y = ex_y();
    LPDO s;
    s.add_term(1, 2, x * x);
    s.add_term(0, 2, Expr(2) * x);
    s.add_term(1, 0, x);
    s.add_term(0, 0, Expr(1));
    Expr psi = sin(y / sqrt(x));

    REQUIRE(is_zero(apply(s, psi)).zeroish());
    CHECK(code_of([&] {
              darboux_from_solution(s, psi, Direction::dx_family);
          }) == Errc::condition_violated);

    // the mirrored family happens to admit one; it must then verify
    DarbouxResult res = darboux_from_solution(s, psi, Direction::dy_family);
    CHECK(res.verification.passed());
}

TEST_CASE("results from kernel elements are never invertible") {
    set_zero_seed(12345);
    Expr x = ex_x(), y = ex_y();
    DarbouxResult a =
        darboux_from_solution(op_5_3(), x, Direction::dx_family);
    CHECK(!a.invertibility.invertible());
    DarbouxResult b = darboux_from_solution(op_hyperbolic_exp(), exp(x + y),
                                            Direction::dx_family);
    CHECK(!b.invertibility.invertible());
    CHECK(b.verification.passed());
}

TEST_CASE("sufficiency check accepts a reverse-engineered kernel family") {
    set_zero_seed(12345);
    Expr x = ex_x(), y = ex_y();
    LPDO l = op_double_factor();
    Expr psi1 = exp(x + y);
    Expr psi2 = y * psi1;

    Theorem51Result out =
        theorem51_check(l, {psi1, psi2}, Direction::dx_family);
    CHECK(out.k_required == 2);
    LPDO expect_m = LPDO::dx();
    expect_m.add_term(0, 0, Expr(-1));
    CHECK(equal(out.M, expect_m).passed());
    CHECK(out.result.verification.passed());

    // mirrored family
    LPDO inner = LPDO::dy();
    inner.add_term(0, 0, Expr(-1));
    LPDO lm = compose(LPDO::dx(), compose(inner, inner));
    Theorem51Result mirror =
        theorem51_check(lm, {psi1, x * psi1}, Direction::dy_family);
    CHECK(mirror.k_required == 2);
    LPDO expect_my = LPDO::dy();
    expect_my.add_term(0, 0, Expr(-1));
    CHECK(equal(mirror.M, expect_my).passed());
}

TEST_CASE("sufficiency check rejects deficient kernel families") {
    set_zero_seed(12345);
    Expr x = ex_x(), y = ex_y();
    LPDO l = op_double_factor();
    Expr psi1 = exp(x + y);

    CHECK(code_of([&] {
              theorem51_check(l, {psi1}, Direction::dx_family);
          }) == Errc::too_few_solutions);
    CHECK(code_of([&] {
              theorem51_check(l, {psi1, x * psi1}, Direction::dx_family);
          }) == Errc::ratio_not_separated);
    CHECK(code_of([&] {
              theorem51_check(l, {psi1, Expr(2) * psi1}, Direction::dx_family);
          }) == Errc::wronskian_vanishes);
    CHECK(code_of([&] {
              theorem51_check(l, {psi1, y}, Direction::dx_family);
          }) == Errc::not_in_kernel);
}

TEST_CASE("sufficiency check with a single required solution") {
    set_zero_seed(12345);
    LPDO l = op_hyperbolic_exp();
    Theorem51Result out =
        theorem51_check(l, {exp(ex_x() + ex_y())}, Direction::dx_family);
    CHECK(out.k_required == 1);
    CHECK(out.result.verification.passed());
    CHECK(!out.result.invertibility.invertible());
}

TEST_CASE("laplace invariants of the hyperbolic normal form") {
    set_zero_seed(12345);
    LaplaceInvariants triv = laplace_invariants(parse_op("Dx*Dy"));
    CHECK(triv.h.is_zero_canonical());
    CHECK(triv.k.is_zero_canonical());

    LaplaceInvariants inv = laplace_invariants(parse_op("Dx*Dy + x*Dy + 1"));
    CHECK((inv.h + Expr(1)).is_zero_canonical());
    CHECK((inv.k + Expr(1)).is_zero_canonical());

    CHECK(code_of([] { laplace_invariants(parse_op("Dx^2 + 1")); }) ==
          Errc::not_hyperbolic_normal_form);
    CHECK(code_of([] { laplace_invariants(parse_op("2*Dx*Dy + 1")); }) ==
          Errc::not_hyperbolic_normal_form);
    CHECK(code_of([] {
              laplace_invariants(parse_op("Dx*Dy + Dx^2 + 1"));
          }) == Errc::not_hyperbolic_normal_form);
}

TEST_CASE("laplace invariants are gauge invariant") {
    std::mt19937 rng(71);
    set_zero_seed(12345);
    for (int trial = 0; trial < 4; ++trial) {
        LPDO l;
        l.add_term(1, 1, Expr(1));
        l.add_term(1, 0, testgen::rand_poly(rng, 2));
        l.add_term(0, 1, testgen::rand_poly(rng, 2));
        l.add_term(0, 0, testgen::rand_poly(rng, 2));
        Expr g = testgen::rand_ratfun_nonzero(rng, 1);
        LaplaceInvariants before = laplace_invariants(l);
        LaplaceInvariants after = laplace_invariants(gauge(l, g));
        CHECK(is_zero(before.h - after.h).zeroish());
        CHECK(is_zero(before.k - after.k).zeroish());
    }
}

TEST_CASE("laplace transformation with a polynomial gauge exponent") {
    set_zero_seed(12345);
    Expr x = ex_x();
    LPDO l = parse_op("Dx*Dy + x*Dy + 1");
    DarbouxResult res = laplace_transformation(l, Direction::dx_family);

    LPDO expect_m = LPDO::dx();
    expect_m.add_term(0, 0, x);
    CHECK(equal(res.M, expect_m).passed());
    CHECK(res.invertibility.invertible());
    CHECK(res.verification.passed());

    // the gauged operator's free coefficient is the negated invariant
    LaplaceInvariants inv = laplace_invariants(l);
    LPDO lg = gauge(l, res.gauge_used);
    CHECK(is_zero(lg.coeff(0, 0) + inv.k).zeroish());
    CHECK(is_zero(laplace_invariants(lg).k - inv.k).zeroish());
}

TEST_CASE("laplace transformation with a logarithmic gauge") {
    set_zero_seed(12345);
    Expr x = ex_x(), y = ex_y();
    LPDO l;
    l.add_term(1, 1, Expr(1));
    l.add_term(0, 1, y / x);
    DarbouxResult res = laplace_transformation(l, Direction::dx_family);

    LPDO expect_m = LPDO::dx();
    expect_m.add_term(0, 0, y / x);
    CHECK(equal(res.M, expect_m).passed());
    CHECK(res.invertibility.invertible());
    CHECK(res.verification.passed());
    CHECK(is_zero(diff(res.gauge_used, gen_x) + (y / x) * res.gauge_used)
              .zeroish());
}

TEST_CASE("laplace transformation respects the mirrored family") {
    set_zero_seed(12345);
    Expr x = ex_x();
    LPDO l = parse_op("Dx*Dy + x*Dx");
    LaplaceInvariants inv = laplace_invariants(l);
    CHECK((inv.h - Expr(1)).is_zero_canonical());
    DarbouxResult res = laplace_transformation(l, Direction::dy_family);
    LPDO expect_m = LPDO::dy();
    expect_m.add_term(0, 0, x);
    CHECK(equal(res.M, expect_m).passed());
    CHECK(res.invertibility.invertible());
    CHECK(res.verification.passed());
}

TEST_CASE("laplace transformation refusal cases") {
    set_zero_seed(12345);
    Expr x = ex_x(), y = ex_y();

    CHECK(code_of([] {
              laplace_transformation(parse_op("Dx*Dy + x*Dy"),
                                     Direction::dx_family);
          }) == Errc::zero_invariant);

    LPDO pole;
    pole.add_term(1, 1, Expr(1));
    pole.add_term(0, 1, Expr(1) / (x + y));
    CHECK(code_of([&] {
              laplace_transformation(pole, Direction::dx_family);
          }) == Errc::gauge_not_representable);

    // a manually supplied gauge rescues the unrepresentable case
    Expr g = Expr(1) / (x + y);
    DarbouxResult res =
        laplace_transformation(pole, Direction::dx_family, g);
    CHECK(res.invertibility.invertible());
    CHECK(res.verification.passed());

    CHECK(code_of([&] {
              laplace_transformation(pole, Direction::dx_family, x);
          }) == Errc::gauge_not_representable);
    CHECK(code_of([&] {
              laplace_transformation(pole, Direction::dx_family, Expr(0));
          }) == Errc::zero_gauge);
}

TEST_CASE("construction commutes with gauging by a transverse-variable function") {
    std::mt19937 rng(83);
    set_zero_seed(12345);
    int done = 0;
    while (done < 6) {
        LPDO l = rand_condition_lpdo(rng, Direction::dx_family);
        if (check_condition(l, Direction::dx_family).holds ==
            HoldVerdict::fails)
            continue;
        Expr g = testgen::rand_poly_nonzero(rng, 2, false, true);
        DarbouxResult base = construct(l, Direction::dx_family);
        DarbouxResult moved = construct(gauge(l, g), Direction::dx_family);
        CHECK(equal(moved.M, gauge(base.M, g)).passed());
        CHECK(equal(moved.N, gauge(base.N, g)).passed());
        CHECK(equal(moved.L1, gauge(base.L1, g)).passed());
        CHECK(moved.invertibility.kind == base.invertibility.kind);
        ++done;
    }
}

TEST_CASE("intertwining verdicts for assembled quadruples") {
    set_zero_seed(12345);
    LPDO l = op_4_3();
    DarbouxResult a = construct(l, Direction::dx_family);
    CHECK(verify_intertwining(a.N, l, a.L1, a.M).verdict == EqVerdict::exact);

    LPDO l53 = op_5_3();
    DarbouxResult b = darboux_from_solution(l53, ex_x(), Direction::dx_family);
    CHECK(verify_intertwining(b.N, l53, b.L1, b.M).verdict ==
          EqVerdict::exact);

    LPDO wrong = a.L1;
    wrong.add_term(0, 0, Expr(1));
    EqualReport rep = verify_intertwining(a.N, l, wrong, a.M);
    CHECK(rep.verdict == EqVerdict::not_equal);
    CHECK(rep.differs_at.has_value());
}

TEST_CASE("division result agrees with the coefficient-matching oracle") {
    std::mt19937 rng(91);
    set_zero_seed(12345);
    int done = 0;
    while (done < 6) {
        Direction dir =
            done % 2 ? Direction::dy_family : Direction::dx_family;
        LPDO l = rand_condition_lpdo(rng, dir);
        if (check_condition(l, dir).holds == HoldVerdict::fails) continue;
        DarbouxResult res = construct(l, dir);
        auto oracle = complete_l1(l, res.M, res.N);
        REQUIRE(oracle.has_value());
        CHECK(equal(*oracle, res.L1).passed());
        ++done;
    }
}
