#pragma once

// Text form of expressions and operators. parse/print round-trip: printing is
// canonical (terms in graded-lex descending order) and reparses to the same
// canonical form, so parse(print(v)) == v exactly.

#include "lpdo.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace darboux {

struct SourceSpan {
    size_t start = 0;
    size_t end = 0;  // one past the last byte
};

struct ParseError : std::exception {
    std::string message;
    SourceSpan span;
    std::vector<std::string> expected;  // what would have been accepted here
    bool non_normal_form = false;

    ParseError(std::string msg, SourceSpan sp, std::vector<std::string> exp, bool nnf = false)
        : message(std::move(msg)), span(sp), expected(std::move(exp)), non_normal_form(nnf) {
        std::ostringstream os;
        os << message << " at " << span.start << ".." << span.end;
        if (!expected.empty()) {
            os << " (expected ";
            for (size_t i = 0; i < expected.size(); ++i) os << (i ? ", " : "") << expected[i];
            os << ")";
        }
        rendered_ = os.str();
    }
    const char* what() const noexcept override { return rendered_.c_str(); }

  private:
    std::string rendered_;
};

namespace detail {

enum class Tok { num, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
};

inline std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    auto push = [&](Tok k, size_t b, size_t e) { out.push_back({k, s.substr(b, e - b), {b, e}}); };
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (std::isdigit(c)) {
            size_t b = i;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            push(Tok::num, b, i);
            continue;
        }
        if (std::isalpha(c) || c == '_') {
            size_t b = i;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
                ++i;
            push(Tok::ident, b, i);
            continue;
        }
        // U+2212 minus sign, accepted as '-'
        if (c == 0xE2 && i + 2 < s.size() &&
            static_cast<unsigned char>(s[i + 1]) == 0x88 &&
            static_cast<unsigned char>(s[i + 2]) == 0x92) {
            push(Tok::minus, i, i + 3);
            i += 3;
            continue;
        }
        switch (c) {
            case '+': push(Tok::plus, i, i + 1); break;
            case '-': push(Tok::minus, i, i + 1); break;
            case '*': push(Tok::star, i, i + 1); break;
            case '/': push(Tok::slash, i, i + 1); break;
            case '^': push(Tok::caret, i, i + 1); break;
            case '(': push(Tok::lparen, i, i + 1); break;
            case ')': push(Tok::rparen, i, i + 1); break;
            default:
                throw ParseError("unexpected character", {i, i + 1},
                                 {"digit", "identifier", "operator", "parenthesis"});
        }
        ++i;
    }
    out.push_back({Tok::end, "", {s.size(), s.size()}});
    return out;
}

inline std::optional<Rat> expr_rational(const Expr& e) {
    const RatForm& rf = e.rf();
    if (!rf.den.is_one()) return std::nullopt;
    if (rf.num.zero()) return Rat(0);
    if (rf.num.t.size() != 1) return std::nullopt;
    const auto& [m, c] = *rf.num.t.begin();
    if (!m.f.empty()) return std::nullopt;
    return c;
}

class Parser {
  public:
    explicit Parser(const std::string& src) : toks_(lex(src)) {}

    Expr expr_all() {
        Expr e = sum();
        if (peek().kind != Tok::end)
            throw ParseError("trailing input", peek().span, {"'+'", "'-'", "'*'", "'/'", "end"});
        return e;
    }

    LPDO operator_all() {
        LPDO r;
        bool neg = false;
        if (peek().kind == Tok::minus || peek().kind == Tok::plus)
            neg = next().kind == Tok::minus;
        op_term(r, neg);
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            bool n = next().kind == Tok::minus;
            op_term(r, n);
        }
        if (peek().kind != Tok::end)
            throw ParseError("trailing input", peek().span, {"'+'", "'-'", "end"});
        return r;
    }

  private:
    const Token& peek(size_t k = 0) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
    }
    const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    void expect(Tok k, const char* shown) {
        if (peek().kind != k)
            throw ParseError("unexpected token", peek().span, {shown});
        next();
    }

    Expr sum() {
        Expr e = product();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            bool minus = next().kind == Tok::minus;
            Expr r = product();
            e = minus ? e - r : e + r;
        }
        return e;
    }

    Expr product() {
        Expr e = unary();
        while (peek().kind == Tok::star || peek().kind == Tok::slash) {
            bool div = next().kind == Tok::slash;
            Expr r = unary();
            e = div ? e / r : e * r;
        }
        return e;
    }

    Expr unary() {
        if (peek().kind == Tok::minus) {
            next();
            return -unary();
        }
        if (peek().kind == Tok::plus) {
            next();
            return unary();
        }
        return power();
    }

    Expr power() {
        Expr base = atom();
        if (peek().kind != Tok::caret) return base;
        next();
        SourceSpan sp = peek().span;
        Expr e = unary();  // right-associative: x^2^3 == x^(2^3)
        std::optional<Rat> q = expr_rational(e);
        if (!q)
            throw ParseError("exponent must be a rational constant", sp,
                             {"integer", "rational", "parenthesized rational"});
        return pow(base, *q);
    }

    bool is_dtoken(const Token& t) const {
        return t.kind == Tok::ident && (t.text == "Dx" || t.text == "Dy");
    }

    Expr atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::num: {
                next();
                return Expr(Rat(Int(t.text)));
            }
            case Tok::lparen: {
                next();
                Expr e = sum();
                expect(Tok::rparen, "')'");
                return e;
            }
            case Tok::ident: {
                if (t.text == "x") {
                    next();
                    return ex_x();
                }
                if (t.text == "y") {
                    next();
                    return ex_y();
                }
                if (is_dtoken(t))
                    throw ParseError("differential operator in expression context", t.span,
                                     {"'x'", "'y'", "number", "function", "'('"});
                if (t.text == "sin" || t.text == "cos" || t.text == "exp" || t.text == "log" ||
                    t.text == "sqrt") {
                    std::string name = t.text;
                    next();
                    expect(Tok::lparen, "'('");
                    Expr arg = sum();
                    expect(Tok::rparen, "')'");
                    if (name == "sin") return sin(arg);
                    if (name == "cos") return cos(arg);
                    if (name == "exp") return exp(arg);
                    if (name == "log") return log(arg);
                    return pow(arg, Rat(1, 2));
                }
                throw ParseError("unknown identifier '" + t.text + "'", t.span,
                                 {"'x'", "'y'", "sin", "cos", "exp", "log", "sqrt"});
            }
            default:
                throw ParseError("expected a term", t.span,
                                 {"number", "'x'", "'y'", "'('", "function"});
        }
    }

    // One additive term of an operator: '*'/'/'-separated factors, every
    // expression factor left of every D factor.
    void op_term(LPDO& r, bool neg) {
        Expr coeff(1);
        int di = 0, dj = 0;
        bool seen_d = false;
        bool first = true;
        for (;;) {
            bool div = false;
            if (!first) {
                if (peek().kind == Tok::star) {
                    next();
                } else if (peek().kind == Tok::slash) {
                    next();
                    div = true;
                } else {
                    break;
                }
            }
            first = false;
            if (is_dtoken(peek())) {
                if (div)
                    throw ParseError("cannot divide by a differential operator", peek().span,
                                     {"expression factor"});
                bool isx = peek().text == "Dx";
                SourceSpan dspan = peek().span;
                next();
                Int k(1);
                if (peek().kind == Tok::caret) {
                    next();
                    if (peek().kind != Tok::num)
                        throw ParseError("operator exponent must be a nonnegative integer",
                                         peek().span, {"integer"});
                    k = Int(next().text);
                }
                (void)dspan;
                if (isx)
                    di += static_cast<int>(k);
                else
                    dj += static_cast<int>(k);
                seen_d = true;
            } else {
                SourceSpan fspan = peek().span;
                if (seen_d)
                    throw ParseError("coefficient appears right of a differential operator", fspan,
                                     {"'Dx'", "'Dy'", "'+'", "'-'", "end"}, true);
                Expr f = power();
                coeff = div ? coeff / f : coeff * f;
            }
        }
        r.add_term(di, dj, neg ? -coeff : coeff);
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(const std::string& src) { return detail::Parser(src).expr_all(); }
inline LPDO parse_operator(const std::string& src) { return detail::Parser(src).operator_all(); }

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline std::string rat_text(const Rat& q) {
    std::ostringstream os;
    os << numerator(q);
    if (denominator(q) != 1) os << "/" << denominator(q);
    return os.str();
}

std::string rf_text(const RatForm& rf);

inline std::string gen_text(int g) {
    if (g == gen_x) return "x";
    if (g == gen_y) return "y";
    const AtomInfo& ai = AtomTable::inst().info(g);
    switch (ai.kind) {
        case FunKind::sin_k: return "sin(" + rf_text(*ai.arg) + ")";
        case FunKind::cos_k: return "cos(" + rf_text(*ai.arg) + ")";
        case FunKind::exp_k: return "exp(" + rf_text(*ai.arg) + ")";
        case FunKind::log_k: return "log(" + rf_text(*ai.arg) + ")";
        case FunKind::pow_k:
            return "(" + rf_text(*ai.arg) + ")^(" + rat_text(ai.pexp) + ")";
    }
    return "?";
}

inline std::string factor_text(int g, const Rat& e) {
    std::string b = gen_text(g);
    if (e == 1) return b;
    if (is_integer(e) && e > 0) return b + "^" + rat_text(e);
    return b + "^(" + rat_text(e) + ")";
}

// |coef| * factors, sign handled by the caller
inline std::string term_text(const Rat& coef, const Mono& m) {
    Rat a = coef < 0 ? Rat(-coef) : coef;
    std::vector<std::string> parts;
    if (a != 1 || m.f.empty()) parts.push_back(rat_text(a));
    for (const auto& [g, e] : m.f) parts.push_back(factor_text(g, e));
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? "*" : "") + parts[i];
    return out;
}

inline std::string poly_text(const Poly& p) {
    if (p.zero()) return "0";
    std::string out;
    bool first = true;
    for (auto it = p.t.rbegin(); it != p.t.rend(); ++it) {
        bool neg = it->second < 0;
        if (first)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        out += term_text(it->second, it->first);
        first = false;
    }
    return out;
}

// true when the printed monomial is a single factor (no '*' at the top level),
// so it can sit unparenthesized to the right of '/'
inline bool single_factor(const Poly& p) {
    if (p.t.size() != 1) return false;
    const auto& [m, c] = *p.t.begin();
    return c == 1 && m.f.size() == 1;
}

inline std::string rf_text(const RatForm& rf) {
    if (rf.den.is_one()) return poly_text(rf.num);
    std::string n = rf.num.t.size() > 1 ? "(" + poly_text(rf.num) + ")" : poly_text(rf.num);
    std::string d = single_factor(rf.den) ? poly_text(rf.den) : "(" + poly_text(rf.den) + ")";
    return n + "/" + d;
}

inline bool print_needs_parens_as_factor(const RatForm& rf) {
    // a factor followed by '*Dx...' reparses wrongly only when the printed
    // form has a top-level '+'/'-', i.e. a multi-term numerator with den == 1
    if (!rf.den.is_one()) return false;  // fractions chain through '/' and '*'
    return rf.num.t.size() > 1;
}

}  // namespace detail

inline std::string print_expr(const Expr& e) { return detail::rf_text(e.rf()); }

inline std::string print_operator(const LPDO& L) {
    if (L.zero()) return "0";
    std::vector<std::pair<Bidegree, Expr>> terms(L.coeffs().begin(), L.coeffs().end());
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        int ta = a.first.first + a.first.second, tb = b.first.first + b.first.second;
        if (ta != tb) return ta > tb;
        return a.first.first > b.first.first;
    });
    std::string out;
    bool first = true;
    for (const auto& [bd, c] : terms) {
        // a polynomial free coefficient joins the sum term by term, so its
        // interior signs survive a reparse ("... + y*Dy - x - y - 1")
        if (bd == Bidegree{0, 0} && c.rf().den.is_one() && c.rf().num.t.size() > 1) {
            std::string s = print_expr(c);
            if (first)
                out += s;
            else if (s[0] == '-')
                out += " - " + s.substr(1);
            else
                out += " + " + s;
            first = false;
            continue;
        }
        // pull the sign out of the canonical leading coefficient
        bool neg = false;
        Expr cc = c;
        if (!c.rf().num.zero() && c.rf().num.t.rbegin()->second < 0) {
            neg = true;
            cc = -c;
        }
        std::string dpart;
        if (bd.first > 0) {
            dpart = "Dx";
            if (bd.first > 1) dpart += "^" + std::to_string(bd.first);
        }
        if (bd.second > 0) {
            if (!dpart.empty()) dpart += "*";
            dpart += "Dy";
            if (bd.second > 1) dpart += "^" + std::to_string(bd.second);
        }
        std::string cpart;
        std::optional<Rat> q = detail::expr_rational(cc);
        if (dpart.empty()) {
            cpart = print_expr(cc);
        } else if (!(q && *q == 1)) {
            cpart = detail::print_needs_parens_as_factor(cc.rf()) ? "(" + print_expr(cc) + ")"
                                                                  : print_expr(cc);
        }
        std::string body = cpart.empty() ? dpart
                         : dpart.empty() ? cpart
                                         : cpart + "*" + dpart;
        if (first)
            out += neg ? "-" + body : body;
        else
            out += (neg ? " - " : " + ") + body;
        first = false;
    }
    return out;
}

}  // namespace darboux
