#pragma once

// Elements of the differential field K. An Expr is an immutable handle on a
// canonical RatForm; arithmetic canonicalizes on construction, so
// canonicalize() is the identity and structural equality decides mathematical
// equality on the rational fragment.

#include "eval.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>

namespace darboux {

class Expr {
  public:
    Expr() : rf_(shared(rf_zero())) {}
    Expr(int n) : rf_(shared(rf_const(Rat(n)))) {}
    Expr(const Rat& q) : rf_(shared(rf_const(q))) {}
    explicit Expr(RatForm rf) : rf_(shared(std::move(rf))) {}

    const RatForm& rf() const { return *rf_; }
    bool structurally_equal(const Expr& o) const { return rf_ == o.rf_ || *rf_ == *o.rf_; }
    bool is_zero_canonical() const { return rf_->zero(); }
    bool is_constant(Rat* out = nullptr) const { return rf_->is_constant(out); }

  private:
    static std::shared_ptr<const RatForm> shared(RatForm rf) {
        return std::make_shared<const RatForm>(std::move(rf));
    }
    std::shared_ptr<const RatForm> rf_;
};

inline Expr ex_var(int gen) { return Expr(RatForm{Poly::var(gen), Poly::one()}); }
inline Expr ex_x() { return ex_var(gen_x); }
inline Expr ex_y() { return ex_var(gen_y); }

inline Expr operator+(const Expr& a, const Expr& b) { return Expr(rf_add(a.rf(), b.rf())); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr(rf_sub(a.rf(), b.rf())); }
inline Expr operator-(const Expr& a) { return Expr(rf_neg(a.rf())); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr(rf_mul(a.rf(), b.rf())); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr(rf_div(a.rf(), b.rf())); }

inline Expr pow(const Expr& a, const Rat& e) { return Expr(rf_pow(a.rf(), e)); }
inline Expr sqrt(const Expr& a) { return pow(a, Rat(1) / 2); }
inline Expr sin(const Expr& a) { return Expr(rf_fun(FunKind::sin_k, a.rf())); }
inline Expr cos(const Expr& a) { return Expr(rf_fun(FunKind::cos_k, a.rf())); }
inline Expr exp(const Expr& a) { return Expr(rf_fun(FunKind::exp_k, a.rf())); }
inline Expr log(const Expr& a) { return Expr(rf_fun(FunKind::log_k, a.rf())); }

inline Expr canonicalize(const Expr& e) { return e; }

inline Expr diff(const Expr& e, int var) {
    assert(var == gen_x || var == gen_y);
    return Expr(rf_diff(e.rf(), var));
}

inline Float evaluate(const Expr& e, const Point& p, unsigned prec_bits = 128) {
    return rf_evaluate(e.rf(), p, prec_bits);
}

// ---------------------------------------------------------------------------
// Zero testing

enum class ZeroKind { zero, nonzero, probably_zero };

struct ZeroVerdict {
    ZeroKind kind;
    int trials = 0;                 // probably_zero: number of agreeing samples
    std::optional<Point> witness;   // nonzero via sampling: the witness point
    bool zeroish() const { return kind != ZeroKind::nonzero; }
    bool probable() const { return kind == ZeroKind::probably_zero; }
};

struct ZeroCfg {
    std::uint64_t seed = 12345;
    int trials = 8;
    double tol = 1e-9;
    unsigned prec_bits = 128;
    long bound = 10000;
};

inline ZeroCfg& zero_cfg() {
    static ZeroCfg c;
    return c;
}

inline std::mt19937_64& zero_rng() {
    static std::mt19937_64 eng(zero_cfg().seed);
    return eng;
}

inline void set_zero_seed(std::uint64_t s) {
    zero_cfg().seed = s;
    zero_rng().seed(s);
}

namespace detail {

// sin(u)^(2k+r) -> (1 - cos(u)^2)^k sin(u)^r, applied to every term; the only
// rewrite direction, so it terminates.
inline Poly rewrite_sin_squares(const Poly& p) {
    Poly cur = p;
    for (;;) {
        const Mono* hitm = nullptr;
        size_t hiti = 0;
        Int k2;
        for (const auto& [m, c] : cur.t) {
            for (size_t i = 0; i < m.f.size(); ++i) {
                int g = m.f[i].first;
                if (g < 2) continue;
                if (AtomTable::inst().info(g).kind != FunKind::sin_k) continue;
                Int half = rat_floor(m.f[i].second / 2);
                if (half >= 1) {
                    hitm = &m;
                    hiti = i;
                    k2 = half;
                    break;
                }
            }
            if (hitm) break;
        }
        if (!hitm) return cur;
        Mono m = *hitm;
        Rat c = cur.t.at(m);
        int sgen = m.f[hiti].first;
        const AtomInfo& ai = AtomTable::inst().info(sgen);
        std::vector<std::pair<int, Rat>> rest = m.f;
        rest[hiti].second -= Rat(2 * k2);
        RatForm cosu = rf_fun(FunKind::cos_k, *ai.arg);
        Poly one_minus_cos2 = Poly::one() - cosu.num * cosu.num;
        Poly replacement = mono_to_poly(c, rest) * poly_pow(one_minus_cos2, k2);
        cur.t.erase(m);
        cur = cur + replacement;
    }
}

inline Point draw_point(std::mt19937_64& rng, long bound, bool positive_only) {
    std::uniform_int_distribution<long> mag(1, bound);
    std::uniform_int_distribution<int> sign(0, 1);
    auto draw = [&]() {
        Rat q(Int(mag(rng)), Int(mag(rng)));
        if (!positive_only && sign(rng)) q = -q;
        return q;
    };
    return Point{draw(), draw()};
}

}  // namespace detail

inline ZeroVerdict is_zero(const Expr& e, const ZeroCfg& cfg = zero_cfg()) {
    const RatForm& rf = e.rf();
    if (rf.num.zero()) return {ZeroKind::zero};
    detail::RfTraits tr;
    detail::rf_traits(rf, tr);
    if (!tr.has_atoms) return {ZeroKind::nonzero};
    Poly rewritten = detail::rewrite_sin_squares(rf.num);
    if (rewritten.zero()) return {ZeroKind::zero};
    detail::RfTraits tr2;
    detail::poly_traits(rewritten, tr2);
    if (!tr2.has_atoms) return {ZeroKind::nonzero};
    std::mt19937_64& rng = zero_rng();
    int hits = 0;
    int attempts = 0;
    const int cap = cfg.trials * 8;
    while (hits < cfg.trials && attempts < cap) {
        ++attempts;
        Point pt = detail::draw_point(rng, cfg.bound, tr.needs_positive);
        try {
            Float v = rf_evaluate(rf, pt, cfg.prec_bits);
            if (boost::multiprecision::abs(v) > cfg.tol)
                return {ZeroKind::nonzero, hits, pt};
            ++hits;
        } catch (const Error& err) {
            if (err.code != Errc::pole_at_point && err.code != Errc::domain_error) throw;
        }
    }
    if (hits < cfg.trials)
        throw Error(Errc::undecided_after_retries,
                    "every sampled point hit a pole or domain error");
    return {ZeroKind::probably_zero, hits};
}

inline ZeroVerdict equality_verdict(const Expr& a, const Expr& b) { return is_zero(a - b); }

inline ZeroVerdict depends_only_on_verdict(const Expr& e, int var) {
    int other = var == gen_x ? gen_y : gen_x;
    return is_zero(diff(e, other));
}

inline bool depends_only_on(const Expr& e, int var) {
    return depends_only_on_verdict(e, var).zeroish();
}

}  // namespace darboux
