#pragma once

// Canonical rational forms over the differential field K: multivariate
// polynomial fractions in the generators x, y and interned transcendental
// atoms (sin/cos/exp/log applications, fractional powers of non-monomial
// bases). Exponents are rational so that terms like x^(-1/2) stay inside the
// monomial algebra; denominators are kept monic under a fixed graded-lex
// monomial order and numerator/denominator are reduced by a primitive-PRS
// multivariate gcd, which makes the representation unique on the rational
// fragment.

#include "errors.hpp"
#include "numeric.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace darboux {

constexpr int gen_x = 0;
constexpr int gen_y = 1;

enum class FunKind { sin_k, cos_k, exp_k, log_k, pow_k };

struct RatForm;

inline bool gen_less(int a, int b);

struct Mono {
    // (generator, exponent) pairs with nonzero exponents, sorted by gen_less.
    std::vector<std::pair<int, Rat>> f;

    bool is_unit() const { return f.empty(); }
    Rat total_degree() const {
        Rat d(0);
        for (const auto& [g, e] : f) d += e;
        return d;
    }
    Rat exponent(int gen) const {
        for (const auto& [g, e] : f)
            if (g == gen) return e;
        return Rat(0);
    }
    bool operator==(const Mono& o) const { return f == o.f; }
};

inline int mono_cmp(const Mono& a, const Mono& b) {
    int c = rat_cmp(a.total_degree(), b.total_degree());
    if (c != 0) return c;
    size_t i = 0, j = 0;
    while (i < a.f.size() || j < b.f.size()) {
        if (i == a.f.size()) return rat_cmp(Rat(0), b.f[j].second);
        if (j == b.f.size()) return rat_cmp(a.f[i].second, Rat(0));
        int ga = a.f[i].first, gb = b.f[j].first;
        if (ga == gb) {
            c = rat_cmp(a.f[i].second, b.f[j].second);
            if (c != 0) return c;
            ++i, ++j;
        } else if (gen_less(ga, gb)) {
            c = rat_cmp(a.f[i].second, Rat(0));
            if (c != 0) return c;
            ++i;
        } else {
            c = rat_cmp(Rat(0), b.f[j].second);
            if (c != 0) return c;
            ++j;
        }
    }
    return 0;
}

struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const { return mono_cmp(a, b) < 0; }
};

struct AtomInfo {
    FunKind kind;
    std::shared_ptr<const RatForm> arg;  // function argument / power base (base: den == 1)
    Rat pexp;                            // pow_k only: exponent in (0,1)
    std::string key;                     // structural identity, stable across processes
};

class AtomTable {
  public:
    static AtomTable& inst() {
        static AtomTable t;
        return t;
    }
    int intern(FunKind kind, std::shared_ptr<const RatForm> arg, const Rat& pexp, std::string key) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(atoms_.size()) + 2;
        atoms_.push_back(AtomInfo{kind, std::move(arg), pexp, key});
        index_.emplace(std::move(key), id);
        return id;
    }
    const AtomInfo& info(int gen) const {
        std::lock_guard<std::mutex> lock(mu_);
        return atoms_.at(static_cast<size_t>(gen - 2));
    }

  private:
    AtomTable() = default;
    mutable std::mutex mu_;
    std::deque<AtomInfo> atoms_;
    std::map<std::string, int> index_;
};

inline bool gen_less(int a, int b) {
    if (a == b) return false;
    if (a < 2 || b < 2) return a < b;
    return AtomTable::inst().info(a).key < AtomTable::inst().info(b).key;
}

struct Poly {
    std::map<Mono, Rat, MonoLess> t;

    bool zero() const { return t.empty(); }
    bool is_one() const {
        return t.size() == 1 && t.begin()->first.is_unit() && t.begin()->second == 1;
    }
    static Poly constant(const Rat& c) {
        Poly p;
        if (c != 0) p.t.emplace(Mono{}, c);
        return p;
    }
    static Poly one() { return constant(Rat(1)); }
    static Poly var(int gen, const Rat& exp = Rat(1)) {
        Poly p;
        Mono m;
        if (exp != 0) m.f.emplace_back(gen, exp);
        p.t.emplace(std::move(m), Rat(1));
        return p;
    }
    bool is_constant(Rat* out = nullptr) const {
        if (t.empty()) {
            if (out) *out = 0;
            return true;
        }
        if (t.size() == 1 && t.begin()->first.is_unit()) {
            if (out) *out = t.begin()->second;
            return true;
        }
        return false;
    }
    const std::pair<const Mono, Rat>& lead() const { return *t.rbegin(); }
};

inline void poly_acc(Poly& p, const Mono& m, const Rat& c) {
    if (c == 0) return;
    auto [it, fresh] = p.t.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) p.t.erase(it);
    }
}

inline Poly operator+(const Poly& a, const Poly& b) {
    Poly r = a;
    for (const auto& [m, c] : b.t) poly_acc(r, m, c);
    return r;
}

inline Poly poly_scale(const Poly& a, const Rat& c) {
    Poly r;
    if (c == 0) return r;
    for (const auto& [m, k] : a.t) r.t.emplace(m, k * c);
    return r;
}

inline Poly operator-(const Poly& a, const Poly& b) { return a + poly_scale(b, Rat(-1)); }

// Merge factor lists (sorting by generator order, summing exponents) and fold
// fractional-power atoms whose accumulated exponent leaves the (0,1) range:
// pow(B,r)^k = B^floor(k*r) * pow(B, frac(k*r)). Folding multiplies the
// monomial out into a polynomial, so the general product of two monomials is
// a Poly.
Poly mono_to_poly(const Rat& coef, std::vector<std::pair<int, Rat>> fs);

inline Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a.t)
        for (const auto& [mb, cb] : b.t) {
            std::vector<std::pair<int, Rat>> fs = ma.f;
            fs.insert(fs.end(), mb.f.begin(), mb.f.end());
            Poly part = mono_to_poly(ca * cb, std::move(fs));
            for (const auto& [m, c] : part.t) poly_acc(r, m, c);
        }
    return r;
}

inline Poly poly_pow(const Poly& a, Int n) {
    assert(n >= 0);
    Poly acc = Poly::one(), b = a;
    while (n > 0) {
        if ((n & 1) != 0) acc = acc * b;
        b = b * b;
        n >>= 1;
    }
    return acc;
}

struct RatForm {
    Poly num, den;  // den monic and coprime to num

    bool zero() const { return num.zero(); }
    bool is_constant(Rat* out = nullptr) const {
        Rat dc;
        if (!den.is_constant(&dc)) return false;
        Rat nc;
        if (!num.is_constant(&nc)) return false;
        if (out) *out = nc / dc;
        return true;
    }
    bool operator==(const RatForm& o) const { return num.t == o.num.t && den.t == o.den.t; }
};

Poly poly_gcd(const Poly& a, const Poly& b);
Poly poly_divexact(const Poly& a, const Poly& b);

inline RatForm rf_make(Poly n, Poly d) {
    if (d.zero()) throw Error(Errc::division_by_zero, "denominator vanishes identically");
    if (n.zero()) return RatForm{Poly{}, Poly::one()};
    Poly g = poly_gcd(n, d);
    Rat gc;
    if (!g.is_constant(&gc) || gc != 1) {
        n = poly_divexact(n, g);
        d = poly_divexact(d, g);
    }
    const Rat& lc = d.lead().second;
    if (lc != 1) {
        n = poly_scale(n, Rat(1) / lc);
        d = poly_scale(d, Rat(1) / lc);
    }
    return RatForm{std::move(n), std::move(d)};
}

inline RatForm rf_zero() { return RatForm{Poly{}, Poly::one()}; }
inline RatForm rf_const(const Rat& c) { return RatForm{Poly::constant(c), Poly::one()}; }
inline RatForm rf_poly(Poly p) { return RatForm{std::move(p), Poly::one()}; }

// Builds num/den from a single generalized monomial whose exponents may be
// negative; negative powers move into the denominator.
inline RatForm rf_from_factors(const Rat& coef, const std::vector<std::pair<int, Rat>>& fs) {
    std::vector<std::pair<int, Rat>> pos, neg;
    for (const auto& [g, e] : fs) {
        if (e == 0) continue;
        if (e > 0)
            pos.emplace_back(g, e);
        else
            neg.emplace_back(g, -e);
    }
    return rf_make(mono_to_poly(coef, std::move(pos)), mono_to_poly(Rat(1), std::move(neg)));
}

inline RatForm rf_add(const RatForm& a, const RatForm& b) {
    return rf_make(a.num * b.den + b.num * a.den, a.den * b.den);
}
inline RatForm rf_neg(const RatForm& a) { return RatForm{poly_scale(a.num, Rat(-1)), a.den}; }
inline RatForm rf_sub(const RatForm& a, const RatForm& b) { return rf_add(a, rf_neg(b)); }
inline RatForm rf_mul(const RatForm& a, const RatForm& b) {
    return rf_make(a.num * b.num, a.den * b.den);
}
inline RatForm rf_scale(const RatForm& a, const Rat& c) {
    if (c == 0) return rf_zero();
    return RatForm{poly_scale(a.num, c), a.den};
}
inline RatForm rf_div(const RatForm& a, const RatForm& b) {
    if (b.zero()) throw Error(Errc::division_by_zero, "division by zero expression");
    return rf_make(a.num * b.den, a.den * b.num);
}

RatForm rf_pow(const RatForm& a, const Rat& e);
RatForm rf_fun(FunKind kind, const RatForm& arg);
RatForm rf_diff(const RatForm& a, int var);

std::string poly_key(const Poly& p);
inline std::string rf_key(const RatForm& a) { return poly_key(a.num) + "|" + poly_key(a.den); }

// ---------------------------------------------------------------------------
// Monomial folding

inline Poly mono_to_poly(const Rat& coef, std::vector<std::pair<int, Rat>> fs) {
    if (coef == 0) return Poly{};
    Rat c = coef;
    std::vector<Poly> multipliers;
    for (;;) {
        std::sort(fs.begin(), fs.end(),
                  [](const auto& a, const auto& b) { return gen_less(a.first, b.first); });
        std::vector<std::pair<int, Rat>> merged;
        merged.reserve(fs.size());
        for (auto& [g, e] : fs) {
            if (e == 0) continue;
            if (!merged.empty() && merged.back().first == g) {
                merged.back().second += e;
                if (merged.back().second == 0) merged.pop_back();
            } else {
                merged.emplace_back(g, e);
            }
        }
        fs = std::move(merged);
        size_t hit = fs.size();
        for (size_t i = 0; i < fs.size(); ++i) {
            if (fs[i].first < 2 || fs[i].second == 1) continue;
            if (AtomTable::inst().info(fs[i].first).kind == FunKind::pow_k) {
                hit = i;
                break;
            }
        }
        if (hit == fs.size()) break;
        const AtomInfo& ai = AtomTable::inst().info(fs[hit].first);
        Rat etot = fs[hit].second * ai.pexp;
        fs.erase(fs.begin() + static_cast<long>(hit));
        assert(etot > 0);
        Int whole = rat_floor(etot);
        Rat frac = etot - Rat(whole);
        if (whole > 0) multipliers.push_back(poly_pow(ai.arg->num, whole));
        if (frac != 0) {
            RatForm part = rf_pow(*ai.arg, frac);
            assert(part.den.is_constant());
            if (part.num.t.size() == 1) {
                const auto& [pm, pc] = *part.num.t.begin();
                c *= pc;
                fs.insert(fs.end(), pm.f.begin(), pm.f.end());
            } else {
                multipliers.push_back(part.num);
            }
        }
    }
    Mono m;
    m.f = std::move(fs);
    Poly r;
    r.t.emplace(std::move(m), c);
    for (const Poly& p : multipliers) r = r * p;
    return r;
}

// ---------------------------------------------------------------------------
// Multivariate gcd: monomial content + primitive PRS in a chosen main variable

namespace detail {

inline void gens_of(const Poly& p, std::vector<int>& out) {
    for (const auto& [m, c] : p.t)
        for (const auto& [g, e] : m.f)
            if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
}

inline Mono mono_content(const Poly& p) {
    Mono content;
    bool first = true;
    for (const auto& [m, c] : p.t) {
        if (first) {
            content = m;
            first = false;
            continue;
        }
        Mono next;
        for (const auto& [g, e] : content.f) {
            Rat other = m.exponent(g);
            Rat mn = e < other ? e : other;
            if (mn > 0) next.f.emplace_back(g, mn);
        }
        content = std::move(next);
        if (content.f.empty()) break;
    }
    return content;
}

inline Poly strip_mono(const Poly& p, const Mono& m) {
    if (m.f.empty()) return p;
    Poly r;
    for (const auto& [mm, c] : p.t) {
        std::vector<std::pair<int, Rat>> fs = mm.f;
        for (const auto& [g, e] : m.f)
            for (auto& [fg, fe] : fs)
                if (fg == g) fe -= e;
        Mono nm;
        for (auto& [g, e] : fs)
            if (e != 0) nm.f.emplace_back(g, e);
        r.t.emplace(std::move(nm), c);
    }
    return r;
}

// Degree and coefficient view in one generator (integer exponents expected).
inline long deg_in(const Poly& p, int v) {
    Rat d(0);
    for (const auto& [m, c] : p.t) {
        Rat e = m.exponent(v);
        if (e > d) d = e;
    }
    assert(is_integer(d));
    return d.convert_to<long>();
}

inline Poly coeff_of(const Poly& p, int v, long k) {
    Poly r;
    for (const auto& [m, c] : p.t) {
        if (m.exponent(v) != k) continue;
        Mono nm;
        for (const auto& [g, e] : m.f)
            if (g != v) nm.f.emplace_back(g, e);
        r.t.emplace(std::move(nm), c);
    }
    return r;
}

inline Poly mul_var_pow(const Poly& p, int v, long k) {
    if (k == 0) return p;
    return p * Poly::var(v, Rat(k));
}

// Divide out the rational content so coefficients stay small along the PRS.
inline Poly rat_primitive(const Poly& p) {
    if (p.zero()) return p;
    Int g(0), l(1);
    for (const auto& [m, c] : p.t) {
        g = gcd(g, abs(numerator(c)));
        l = lcm(l, denominator(c));
    }
    Rat scale = Rat(l) / Rat(g);
    if (p.lead().second < 0) scale = -scale;
    return poly_scale(p, scale);
}

Poly gcd_int(const Poly& a, const Poly& b);

inline Poly content_in(const Poly& p, int v) {
    long d = deg_in(p, v);
    Poly c;
    for (long k = 0; k <= d; ++k) {
        Poly ck = coeff_of(p, v, k);
        if (ck.zero()) continue;
        c = c.zero() ? ck : gcd_int(c, ck);
        Rat cc;
        if (c.is_constant(&cc)) return Poly::one();
    }
    return c;
}

inline Poly pseudo_rem(Poly u, const Poly& w, int v) {
    long dw = deg_in(w, v);
    Poly lcw = coeff_of(w, v, dw);
    while (!u.zero()) {
        long du = deg_in(u, v);
        if (du < dw) break;
        Poly lcu = coeff_of(u, v, du);
        u = lcw * u - mul_var_pow(lcu, v, du - dw) * w;
    }
    return u;
}

inline Poly gcd_int(const Poly& a, const Poly& b) {
    if (a.zero()) return b;
    if (b.zero()) return a;
    Mono ca = mono_content(a), cb = mono_content(b);
    Mono cg;
    for (const auto& [g, e] : ca.f) {
        Rat other = cb.exponent(g);
        Rat mn = e < other ? e : other;
        if (mn > 0) cg.f.emplace_back(g, mn);
    }
    Poly pa = strip_mono(a, ca), pb = strip_mono(b, cb);
    Poly unit;
    unit.t.emplace(cg, Rat(1));
    Rat dummy;
    if (pa.is_constant(&dummy) || pb.is_constant(&dummy)) return unit;
    std::vector<int> ga, gb;
    gens_of(pa, ga);
    gens_of(pb, gb);
    int v = -1;
    long best = 0;
    for (int g : ga) {
        if (std::find(gb.begin(), gb.end(), g) == gb.end()) continue;
        long d = std::max(deg_in(pa, g), deg_in(pb, g));
        if (v == -1 || d < best) v = g, best = d;
    }
    if (v == -1) return unit;
    Poly conta = content_in(pa, v), contb = content_in(pb, v);
    Poly r0 = rat_primitive(poly_divexact(pa, conta));
    Poly r1 = rat_primitive(poly_divexact(pb, contb));
    if (deg_in(r0, v) < deg_in(r1, v)) std::swap(r0, r1);
    while (!r1.zero()) {
        Poly r = pseudo_rem(r0, r1, v);
        r0 = std::move(r1);
        if (!r.zero()) r = rat_primitive(poly_divexact(r, content_in(r, v)));
        r1 = std::move(r);
    }
    Poly inner = gcd_int(conta, contb) * rat_primitive(poly_divexact(r0, content_in(r0, v)));
    return unit * inner;
}

}  // namespace detail

inline Poly poly_divexact(const Poly& a, const Poly& b) {
    assert(!b.zero());
    Rat bc;
    if (b.is_constant(&bc)) return poly_scale(a, Rat(1) / bc);
    Poly rem = a, q;
    const auto& [lbm, lbc] = b.lead();
    while (!rem.zero()) {
        const auto& [lm, lc] = rem.lead();
        std::vector<std::pair<int, Rat>> fs = lm.f;
        bool ok = true;
        for (const auto& [g, e] : lbm.f) {
            bool found = false;
            for (auto& [fg, fe] : fs)
                if (fg == g) {
                    fe -= e;
                    found = true;
                    if (fe < 0) ok = false;
                    break;
                }
            if (!found || !ok) {
                ok = false;
                break;
            }
        }
        if (!ok) throw Error(Errc::division_by_zero, "internal: inexact polynomial division");
        Mono qm;
        for (auto& [g, e] : fs)
            if (e != 0) qm.f.emplace_back(g, e);
        Rat qc = lc / lbc;
        poly_acc(q, qm, qc);
        Poly sub;
        sub.t.emplace(std::move(qm), qc);
        rem = rem - sub * b;
    }
    return q;
}

inline Poly poly_gcd(const Poly& a, const Poly& b) {
    auto monic = [](Poly p) {
        if (p.zero()) return p;
        const Rat& lc = p.lead().second;
        return lc == 1 ? p : poly_scale(p, Rat(1) / lc);
    };
    if (a.zero()) return monic(b);
    if (b.zero()) return monic(a);
    // Scale exponents to integers: work in t = g^(1/L) per generator.
    std::vector<int> gens;
    detail::gens_of(a, gens);
    detail::gens_of(b, gens);
    std::map<int, Int> scale;
    for (int g : gens) {
        Int l(1);
        for (const Poly* p : {&a, &b})
            for (const auto& [m, c] : p->t) {
                Rat e = m.exponent(g);
                l = lcm(l, denominator(e));
            }
        scale[g] = l;
    }
    auto rescale = [&](const Poly& p, bool up) {
        Poly r;
        for (const auto& [m, c] : p.t) {
            Mono nm;
            for (const auto& [g, e] : m.f)
                nm.f.emplace_back(g, up ? e * Rat(scale[g]) : e / Rat(scale[g]));
            r.t.emplace(std::move(nm), c);
        }
        return r;
    };
    bool needs = std::any_of(scale.begin(), scale.end(), [](const auto& kv) { return kv.second != 1; });
    Poly sa = needs ? rescale(a, true) : a;
    Poly sb = needs ? rescale(b, true) : b;
    Poly g = detail::gcd_int(sa, sb);
    if (needs) g = rescale(g, false);
    return monic(g);
}

// ---------------------------------------------------------------------------
// Powers, functions, atoms

namespace detail {

inline RatForm rf_atom_mono(int gen) {
    return RatForm{Poly::var(gen), Poly::one()};
}

inline int intern_fun(FunKind kind, const RatForm& arg) {
    const char* names[] = {"sin", "cos", "exp", "log", "pow"};
    std::string key = std::string(names[static_cast<int>(kind)]) + "(" + rf_key(arg) + ")";
    return AtomTable::inst().intern(kind, std::make_shared<RatForm>(arg), Rat(0), std::move(key));
}

inline int intern_pow(const Poly& base, const Rat& frac) {
    assert(frac > 0 && frac < 1);
    std::string key = "pow[" + rat_str(frac) + "](" + poly_key(base) + ")";
    return AtomTable::inst().intern(FunKind::pow_k, std::make_shared<RatForm>(rf_poly(base)), frac,
                                    std::move(key));
}

// c^e for rational c, with the inexact remainder kept as an opaque power atom.
inline RatForm pow_const(const Rat& c, const Rat& e) {
    Rat exact;
    if (rat_pow_exact(c, e, exact)) return rf_const(exact);
    Int whole = rat_floor(e);
    Rat frac = e - Rat(whole);
    RatForm r = rf_const(rat_pow_int(c, whole));
    int atom = intern_pow(Poly::constant(c), frac);
    return rf_mul(r, rf_atom_mono(atom));
}

inline RatForm pow_poly(const Poly& p, const Rat& e);

}  // namespace detail

inline RatForm rf_pow(const RatForm& a, const Rat& e) {
    if (e == 0) return rf_const(Rat(1));
    if (a.zero()) {
        if (e < 0) throw Error(Errc::division_by_zero, "zero raised to a negative power");
        return rf_zero();
    }
    if (is_integer(e)) {
        Int n = numerator(e);
        if (n > 0) return RatForm{poly_pow(a.num, n), poly_pow(a.den, n)};
        return rf_make(poly_pow(a.den, -n), poly_pow(a.num, -n));
    }
    if (a.num.t.size() == 1 && a.den.t.size() == 1) {
        const auto& [nm, nc] = *a.num.t.begin();
        const auto& [dm, dc] = *a.den.t.begin();
        std::vector<std::pair<int, Rat>> fs;
        for (const auto& [g, x] : nm.f) fs.emplace_back(g, x * e);
        for (const auto& [g, x] : dm.f) fs.emplace_back(g, -x * e);
        return rf_mul(detail::pow_const(nc / dc, e), rf_from_factors(Rat(1), fs));
    }
    if (e < 0) return rf_div(detail::pow_poly(a.den, -e), detail::pow_poly(a.num, -e));
    return rf_div(detail::pow_poly(a.num, e), detail::pow_poly(a.den, e));
}

namespace detail {

inline RatForm pow_poly(const Poly& p, const Rat& e) {
    assert(!p.zero() && e > 0);
    Rat c;
    if (p.is_constant(&c)) return pow_const(c, e);
    if (p.t.size() == 1) {
        const auto& [m, mc] = *p.t.begin();
        std::vector<std::pair<int, Rat>> fs;
        for (const auto& [g, x] : m.f) fs.emplace_back(g, x * e);
        return rf_mul(pow_const(mc, e), rf_from_factors(Rat(1), fs));
    }
    const Rat& lc = p.lead().second;
    Poly monic = lc == 1 ? p : poly_scale(p, Rat(1) / lc);
    Int whole = rat_floor(e);
    Rat frac = e - Rat(whole);
    RatForm r = pow_const(lc, e);
    if (whole > 0) r = rf_mul(r, rf_poly(poly_pow(monic, whole)));
    if (frac != 0) r = rf_mul(r, rf_atom_mono(intern_pow(monic, frac)));
    return r;
}

}  // namespace detail

inline RatForm rf_fun(FunKind kind, const RatForm& arg) {
    assert(kind != FunKind::pow_k);
    if (arg.zero()) {
        switch (kind) {
            case FunKind::sin_k: return rf_zero();
            case FunKind::cos_k: return rf_const(Rat(1));
            case FunKind::exp_k: return rf_const(Rat(1));
            case FunKind::log_k: throw Error(Errc::domain_error, "log of zero");
            default: break;
        }
    }
    if (kind == FunKind::log_k) {
        Rat c;
        if (arg.is_constant(&c) && c == 1) return rf_zero();
        // log(exp(u)) -> u
        if (arg.den.is_constant() && arg.num.t.size() == 1) {
            const auto& [m, mc] = *arg.num.t.begin();
            if (mc == 1 && m.f.size() == 1 && m.f[0].first >= 2 && m.f[0].second == 1) {
                const AtomInfo& ai = AtomTable::inst().info(m.f[0].first);
                if (ai.kind == FunKind::exp_k) return *ai.arg;
            }
        }
        return detail::rf_atom_mono(detail::intern_fun(kind, arg));
    }
    if (kind == FunKind::exp_k) {
        // exp(v + sum q_i log u_i) -> exp(v) * prod u_i^{q_i} for rational q_i
        RatForm powers = rf_const(Rat(1));
        RatForm rest = arg;
        if (arg.den.is_constant()) {
            Poly keep;
            for (const auto& [m, c] : arg.num.t) {
                bool folded = false;
                if (m.f.size() == 1 && m.f[0].first >= 2 && m.f[0].second == 1) {
                    const AtomInfo& ai = AtomTable::inst().info(m.f[0].first);
                    if (ai.kind == FunKind::log_k) {
                        powers = rf_mul(powers, rf_pow(*ai.arg, c / arg.den.lead().second));
                        folded = true;
                    }
                }
                if (!folded) keep.t.emplace(m, c);
            }
            rest = rf_make(std::move(keep), arg.den);
        }
        if (rest.zero()) return powers;
        bool negated = rest.num.lead().second < 0;
        if (negated) rest = rf_neg(rest);
        RatForm e = detail::rf_atom_mono(detail::intern_fun(kind, rest));
        if (negated) e = rf_div(rf_const(Rat(1)), e);
        return rf_mul(powers, e);
    }
    // sin/cos: orient the argument sign
    bool negated = arg.num.lead().second < 0;
    RatForm inner = negated ? rf_neg(arg) : arg;
    RatForm r = detail::rf_atom_mono(detail::intern_fun(kind, inner));
    if (kind == FunKind::sin_k && negated) r = rf_neg(r);
    return r;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace detail {

inline RatForm gen_diff(int gen, int var) {
    if (gen == var) return rf_const(Rat(1));
    if (gen < 2) return rf_zero();
    const AtomInfo& ai = AtomTable::inst().info(gen);
    switch (ai.kind) {
        case FunKind::sin_k: return rf_mul(rf_fun(FunKind::cos_k, *ai.arg), rf_diff(*ai.arg, var));
        case FunKind::cos_k:
            return rf_neg(rf_mul(rf_fun(FunKind::sin_k, *ai.arg), rf_diff(*ai.arg, var)));
        case FunKind::exp_k: return rf_mul(rf_atom_mono(gen), rf_diff(*ai.arg, var));
        case FunKind::log_k: return rf_div(rf_diff(*ai.arg, var), *ai.arg);
        case FunKind::pow_k:
            // d(B^r) = r * B^r * B'/B
            return rf_scale(
                rf_mul(rf_atom_mono(gen), rf_div(rf_diff(*ai.arg, var), *ai.arg)), ai.pexp);
    }
    return rf_zero();
}

inline RatForm poly_diff(const Poly& p, int var) {
    RatForm acc = rf_zero();
    for (const auto& [m, c] : p.t) {
        for (size_t i = 0; i < m.f.size(); ++i) {
            RatForm dg = gen_diff(m.f[i].first, var);
            if (dg.zero()) continue;
            std::vector<std::pair<int, Rat>> fs;
            for (size_t j = 0; j < m.f.size(); ++j)
                fs.emplace_back(m.f[j].first, j == i ? m.f[j].second - 1 : m.f[j].second);
            acc = rf_add(acc, rf_mul(rf_scale(rf_from_factors(c, fs), m.f[i].second), dg));
        }
    }
    return acc;
}

}  // namespace detail

inline RatForm rf_diff(const RatForm& a, int var) {
    RatForm dn = detail::poly_diff(a.num, var);
    if (a.den.is_constant()) return rf_div(dn, rf_poly(a.den));
    RatForm dd = detail::poly_diff(a.den, var);
    RatForm d = rf_poly(a.den);
    return rf_sub(rf_div(dn, d), rf_div(rf_mul(RatForm{a.num, Poly::one()}, dd), rf_mul(d, d)));
}

// ---------------------------------------------------------------------------
// Structural keys (atom identity and diagnostics)

inline std::string poly_key(const Poly& p) {
    if (p.zero()) return "0";
    std::string s;
    for (auto it = p.t.rbegin(); it != p.t.rend(); ++it) {
        if (!s.empty()) s += "+";
        s += rat_str(it->second);
        for (const auto& [g, e] : it->first.f) {
            s += "*";
            if (g == gen_x)
                s += "x";
            else if (g == gen_y)
                s += "y";
            else
                s += "[" + AtomTable::inst().info(g).key + "]";
            if (e != 1) s += "^" + rat_str(e);
        }
    }
    return s;
}

}  // namespace darboux
