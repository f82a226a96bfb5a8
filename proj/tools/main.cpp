// Batch command line surface: operator files in, human or JSON reports out.
//
// Exit codes: 0 success, 1 mathematical negative (condition fails, kernel
// membership fails, verification fails, ...), 2 usage or parse error.

#include <darboux/darboux.hpp>
#include <darboux/linsolve.hpp>
#include <darboux/syntax.hpp>
#include <darboux/wronskian.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;
using namespace darboux;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    if (const char* s = std::getenv("DARBOUX_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end && *end == '\0' && end != s) return v;
    }
    return 12345;
}

struct Common {
    std::string direction = "dx";
    bool as_json = false;
    std::uint64_t seed = default_seed();
};

std::vector<Direction> directions_of(const std::string& s) {
    if (s == "dx") return {Direction::dx_family};
    if (s == "dy") return {Direction::dy_family};
    return {Direction::dx_family, Direction::dy_family};
}

const char* direction_name(Direction d) {
    return d == Direction::dx_family ? "dx" : "dy";
}

const char* hold_name(HoldVerdict v) {
    switch (v) {
        case HoldVerdict::exact: return "exact";
        case HoldVerdict::probable: return "probable";
        default: return "fails";
    }
}

const char* eq_name(EqVerdict v) {
    switch (v) {
        case EqVerdict::exact: return "exact";
        case EqVerdict::probable: return "probable";
        default: return "not_equal";
    }
}

std::string invertibility_text(const InvertibilityClass& c) {
    switch (c.kind) {
        case InvertibilityClass::Kind::invertible: return "Invertible";
        case InvertibilityClass::Kind::finite_kernel:
            return "FiniteKernel(" + std::to_string(c.kernel_dim) + ")";
        default: return "InfiniteKernel";
    }
}

json invertibility_json(const InvertibilityClass& c) {
    json r;
    switch (c.kind) {
        case InvertibilityClass::Kind::invertible: r["kind"] = "Invertible"; break;
        case InvertibilityClass::Kind::finite_kernel:
            r["kind"] = "FiniteKernel";
            r["dimension"] = c.kernel_dim;
            break;
        default: r["kind"] = "InfiniteKernel"; break;
    }
    return r;
}

json error_json(const Error& e) {
    return json{{"code", errc_name(e.code)}, {"detail", e.what()}};
}

// A coefficient index within the transverse family of a direction: the dx
// family tests the a_{0j}, the dy family the a_{i0}.
std::string coeff_label(Direction d, int idx) {
    std::ostringstream os;
    if (d == Direction::dx_family)
        os << "a[0," << idx << "]";
    else
        os << "a[" << idx << ",0]";
    return os.str();
}

struct OpLine {
    LPDO op;
    std::string printed;
};

// One operator per line; blank lines and lines starting with '#' are skipped.
std::vector<OpLine> read_operator_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open operator file: " + path);
    std::vector<OpLine> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        std::string body = line.substr(b, e - b + 1);
        if (body[0] == '#') continue;
        try {
            LPDO op = parse_operator(body);
            out.push_back({op, print_operator(op)});
        } catch (const ParseError& pe) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": " + pe.what());
        }
    }
    return out;
}

Expr parse_expr_arg(const std::string& src, const std::string& what_for) {
    try {
        return parse_expr(src);
    } catch (const ParseError& pe) {
        throw UsageError(what_for + ": " + pe.what());
    }
}

LPDO parse_operator_arg(const std::string& src, const std::string& what_for) {
    try {
        return parse_operator(src);
    } catch (const ParseError& pe) {
        throw UsageError(what_for + ": " + pe.what());
    }
}

void emit(const Common& c, const char* command, const json& results) {
    if (!c.as_json) return;
    json doc{{"command", command}, {"seed", c.seed}, {"results", results}};
    std::cout << doc.dump(2) << "\n";
}

int run_check(const std::string& path, const Common& c) {
    auto ops = read_operator_file(path);
    json results = json::array();
    int worst = 0;
    for (const auto& ol : ops) {
        if (!c.as_json) std::cout << ol.printed << "\n";
        for (Direction d : directions_of(c.direction)) {
            json r{{"operator", ol.printed}, {"direction", direction_name(d)}};
            try {
                ConditionReport rep = check_condition(ol.op, d);
                r["holds"] = hold_name(rep.holds);
                if (rep.holds == HoldVerdict::probable) r["trials"] = zero_cfg().trials;
                json ws = json::array();
                for (const auto& [pr, ratio] : rep.witnesses)
                    ws.push_back(json{{"indices", {pr.first, pr.second}},
                                      {"ratio", print_expr(ratio)}});
                r["ratios"] = ws;
                if (rep.failing_pair) {
                    r["failing_pair"] = {rep.failing_pair->first, rep.failing_pair->second};
                    if (rep.counterexample)
                        r["counterexample"] = print_expr(*rep.counterexample);
                }
                if (!rep.ok()) worst = std::max(worst, 1);
                if (!c.as_json) {
                    std::cout << "  " << direction_name(d) << ": ";
                    if (rep.ok()) {
                        std::cout << "holds (" << hold_name(rep.holds);
                        if (rep.holds == HoldVerdict::probable)
                            std::cout << ", " << zero_cfg().trials << " trials";
                        std::cout << ")";
                    } else {
                        std::cout << "fails";
                    }
                    std::cout << "\n";
                    for (const auto& [pr, ratio] : rep.witnesses)
                        std::cout << "      " << coeff_label(d, pr.first) << "/"
                                  << coeff_label(d, pr.second) << " = "
                                  << print_expr(ratio) << "\n";
                    if (rep.failing_pair)
                        std::cout << "      failing pair: "
                                  << coeff_label(d, rep.failing_pair->first) << "/"
                                  << coeff_label(d, rep.failing_pair->second)
                                  << ", derivative "
                                  << (rep.counterexample ? print_expr(*rep.counterexample)
                                                         : std::string("nonzero"))
                                  << "\n";
                }
            } catch (const Error& e) {
                r["error"] = error_json(e);
                worst = std::max(worst, 1);
                if (!c.as_json)
                    std::cout << "  " << direction_name(d) << ": error: " << e.what() << "\n";
            }
            results.push_back(r);
        }
    }
    emit(c, "check", results);
    return worst;
}

int run_transform(const std::string& path, const std::optional<std::string>& psi_src,
                  const Common& c) {
    auto ops = read_operator_file(path);
    std::optional<Expr> psi;
    if (psi_src) psi = parse_expr_arg(*psi_src, "--psi");
    json results = json::array();
    int worst = 0;
    for (const auto& ol : ops) {
        if (!c.as_json) std::cout << ol.printed << "\n";
        for (Direction d : directions_of(c.direction)) {
            json r{{"operator", ol.printed}, {"direction", direction_name(d)}};
            try {
                DarbouxResult res =
                    psi ? darboux_from_solution(ol.op, *psi, d) : construct(ol.op, d);
                r["M"] = print_operator(res.M);
                r["N"] = print_operator(res.N);
                r["L1"] = print_operator(res.L1);
                r["gauge"] = print_expr(res.gauge_used);
                r["invertibility"] = invertibility_json(res.invertibility);
                r["verification"] = eq_name(res.verification.verdict);
                r["probable"] = res.probable;
                if (res.probable) r["trials"] = zero_cfg().trials;
                if (!res.verification.passed()) worst = std::max(worst, 1);
                if (!c.as_json) {
                    std::cout << "  " << direction_name(d) << ": M = "
                              << print_operator(res.M) << "\n";
                    std::cout << "      N = " << print_operator(res.N) << "\n";
                    std::cout << "      L1 = " << print_operator(res.L1) << "\n";
                    std::cout << "      gauge = " << print_expr(res.gauge_used) << "\n";
                    std::cout << "      invertibility = "
                              << invertibility_text(res.invertibility) << "\n";
                    std::cout << "      verification = "
                              << eq_name(res.verification.verdict)
                              << (res.probable ? " (probable)" : "") << "\n";
                }
            } catch (const Error& e) {
                r["error"] = error_json(e);
                worst = std::max(worst, 1);
                if (!c.as_json)
                    std::cout << "  " << direction_name(d) << ": error: " << e.what() << "\n";
            }
            results.push_back(r);
        }
    }
    emit(c, "transform", results);
    return worst;
}

int run_invertible(const std::string& path, const Common& c) {
    auto ops = read_operator_file(path);
    json results = json::array();
    int worst = 0;
    for (const auto& ol : ops) {
        if (!c.as_json) std::cout << ol.printed << "\n";
        for (Direction d : directions_of(c.direction)) {
            json r{{"operator", ol.printed}, {"direction", direction_name(d)}};
            try {
                InvertibilityClass cls = classify(ol.op, d);
                r["invertibility"] = invertibility_json(cls);
                if (!c.as_json)
                    std::cout << "  " << direction_name(d) << ": "
                              << invertibility_text(cls) << "\n";
            } catch (const Error& e) {
                r["error"] = error_json(e);
                worst = std::max(worst, 1);
                if (!c.as_json)
                    std::cout << "  " << direction_name(d) << ": error: " << e.what() << "\n";
            }
            results.push_back(r);
        }
    }
    emit(c, "invertible", results);
    return worst;
}

int run_wronskian(int t, int s, const std::vector<std::string>& fn_src, const Common& c) {
    std::vector<Expr> fns;
    std::vector<std::string> printed;
    for (const auto& src : fn_src) {
        fns.push_back(parse_expr_arg(src, "function '" + src + "'"));
        printed.push_back(print_expr(fns.back()));
    }
    json results = json::array();
    try {
        Expr det = wronskian(WronskianSpec{t, s, fns});
        json r{{"t", t}, {"s", s}, {"functions", printed},
               {"determinant", print_expr(det)}};
        results.push_back(r);
        if (!c.as_json) {
            std::cout << "W[" << t << "," << s << "](";
            for (size_t i = 0; i < printed.size(); ++i)
                std::cout << (i ? ", " : "") << printed[i];
            std::cout << ") = " << print_expr(det) << "\n";
        }
    } catch (const Error& e) {
        if (e.code == Errc::size_mismatch) throw UsageError(e.what());
        results.push_back(json{{"error", error_json(e)}});
        if (!c.as_json) std::cout << "error: " << e.what() << "\n";
        emit(c, "wronskian", results);
        return 1;
    }
    emit(c, "wronskian", results);
    return 0;
}

// The completion step is backed by an existence theorem only for monic
// operators Dx*Dy + a*Dx + b*Dy + c and Dx^2 + a*Dx + b*Dy + c.
bool guaranteed_form(const LPDO& l) {
    Bidegree lead{0, 0};
    if (l.has_term(1, 1))
        lead = {1, 1};
    else if (l.has_term(2, 0))
        lead = {2, 0};
    else
        return false;
    if (!(l.coeff(lead.first, lead.second) - Expr(1)).is_zero_canonical()) return false;
    for (const auto& [bd, e] : l.coeffs()) {
        if (bd == lead) continue;
        if (bd != Bidegree{1, 0} && bd != Bidegree{0, 1} && bd != Bidegree{0, 0})
            return false;
    }
    return true;
}

int run_wop(int m, int n, const std::vector<std::string>& psi_src,
            const std::optional<std::string>& op_path, const Common& c) {
    std::vector<Expr> psis;
    std::vector<std::string> printed;
    for (const auto& src : psi_src) {
        psis.push_back(parse_expr_arg(src, "psi '" + src + "'"));
        printed.push_back(print_expr(psis.back()));
    }
    json results = json::array();
    LPDO wop;
    try {
        wop = wronskian_operator(m, n, psis);
    } catch (const Error& e) {
        if (e.code == Errc::size_mismatch) throw UsageError(e.what());
        results.push_back(json{{"error", error_json(e)}});
        if (!c.as_json) std::cout << "error: " << e.what() << "\n";
        emit(c, "wop", results);
        return 1;
    }
    std::string wop_printed = print_operator(wop);
    if (!c.as_json) std::cout << "operator: " << wop_printed << "\n";
    int worst = 0;
    if (!op_path) {
        results.push_back(json{{"m", m}, {"n", n}, {"psis", printed},
                               {"operator", wop_printed}});
        emit(c, "wop", results);
        return 0;
    }
    auto ops = read_operator_file(*op_path);
    for (const auto& ol : ops) {
        json r{{"m", m}, {"n", n}, {"psis", printed}, {"operator", wop_printed},
               {"L", ol.printed}};
        bool guaranteed = guaranteed_form(ol.op);
        r["existence_guarantee"] = guaranteed;
        if (!c.as_json) {
            std::cout << "L = " << ol.printed << "\n";
            std::cout << "  existence guarantee: " << (guaranteed ? "yes" : "no");
            if (!guaranteed)
                std::cout << " (guaranteed only for monic Dx*Dy + a*Dx + b*Dy + c"
                             " or Dx^2 + a*Dx + b*Dy + c)";
            std::cout << "\n";
        }
        bool kernel_ok = true;
        json kj = json::array();
        for (size_t i = 0; i < psis.size(); ++i) {
            ZeroVerdict zv = is_zero(apply(ol.op, psis[i]));
            const char* verdict = zv.kind == ZeroKind::nonzero
                                      ? "no"
                                      : (zv.probable() ? "probable" : "exact");
            kj.push_back(json{{"psi", printed[i]}, {"in_kernel", verdict}});
            if (zv.kind == ZeroKind::nonzero) kernel_ok = false;
            if (!c.as_json)
                std::cout << "  psi " << printed[i] << ": "
                          << (zv.kind == ZeroKind::nonzero ? "not in kernel"
                                                           : "in kernel")
                          << " (" << (zv.probable() ? "probable" : "exact") << ")\n";
        }
        r["kernel"] = kj;
        if (!kernel_ok) worst = std::max(worst, 1);
        auto done = complete_intertwining(ol.op, wop);
        r["completed"] = bool(done);
        if (done) {
            EqualReport v = equal(compose(done->first, ol.op), compose(done->second, wop));
            r["N"] = print_operator(done->first);
            r["L1"] = print_operator(done->second);
            r["verification"] = eq_name(v.verdict);
            if (!v.passed()) worst = std::max(worst, 1);
            if (!c.as_json) {
                std::cout << "  N = " << print_operator(done->first) << "\n";
                std::cout << "  L1 = " << print_operator(done->second) << "\n";
                std::cout << "  verification: " << eq_name(v.verdict) << "\n";
            }
        } else {
            worst = std::max(worst, 1);
            if (!c.as_json) std::cout << "  no intertwining completion found\n";
        }
        results.push_back(r);
    }
    emit(c, "wop", results);
    return worst;
}

int run_verify(const std::string& n_src, const std::string& l_src,
               const std::string& l1_src, const std::string& m_src, const Common& c) {
    LPDO n = parse_operator_arg(n_src, "--N");
    LPDO l = parse_operator_arg(l_src, "--L");
    LPDO l1 = parse_operator_arg(l1_src, "--L1");
    LPDO m = parse_operator_arg(m_src, "--M");
    LPDO lhs = compose(n, l);
    LPDO rhs = compose(l1, m);
    EqualReport rep = equal(lhs, rhs);
    json r{{"N", print_operator(n)},   {"L", print_operator(l)},
           {"L1", print_operator(l1)}, {"M", print_operator(m)},
           {"lhs", print_operator(lhs)}, {"rhs", print_operator(rhs)},
           {"verdict", eq_name(rep.verdict)}};
    if (rep.verdict == EqVerdict::probable) r["trials"] = zero_cfg().trials;
    if (rep.differs_at) r["differs_at"] = {rep.differs_at->first, rep.differs_at->second};
    if (!c.as_json) {
        std::cout << "N o L  = " << print_operator(lhs) << "\n";
        std::cout << "L1 o M = " << print_operator(rhs) << "\n";
        std::cout << "verdict: " << eq_name(rep.verdict);
        if (rep.differs_at)
            std::cout << " (coefficient of Dx^" << rep.differs_at->first << "*Dy^"
                      << rep.differs_at->second << " differs)";
        std::cout << "\n";
    }
    json results = json::array();
    results.push_back(r);
    emit(c, "verify", results);
    return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Darboux transformations of bivariate linear partial differential operators"};
    app.require_subcommand(1);

    auto add_common = [](CLI::App* sub, Common& c, bool with_direction) {
        if (with_direction)
            sub->add_option("--direction", c.direction, "dx, dy or both")
                ->check(CLI::IsMember({"dx", "dy", "both"}))
                ->capture_default_str();
        sub->add_flag("--json", c.as_json, "machine readable report");
        sub->add_option("--seed", c.seed,
                        "zero test seed (default: DARBOUX_SEED or 12345)")
            ->capture_default_str();
    };

    Common c_check, c_transform, c_invertible, c_wronskian, c_wop, c_verify;
    std::string f_check, f_transform, f_invertible;
    std::optional<std::string> psi_src, wop_file;
    int w_t = 0, w_s = 0, w_m = 0, w_n = 0;
    std::vector<std::string> w_fns, wop_psis;
    std::string v_n, v_l, v_l1, v_m;

    CLI::App* check = app.add_subcommand(
        "check", "test the first order transformation condition per operator");
    check->add_option("file", f_check, "operator file, one per line")->required();
    add_common(check, c_check, true);

    CLI::App* transform = app.add_subcommand(
        "transform", "construct M, N, L1 with N*L = L1*M per operator");
    transform->add_option("file", f_transform, "operator file, one per line")->required();
    transform->add_option("--psi", psi_src, "kernel element generating the transformation");
    add_common(transform, c_transform, true);

    CLI::App* invertible = app.add_subcommand(
        "invertible", "classify invertibility of the transformation per operator");
    invertible->add_option("file", f_invertible, "operator file, one per line")->required();
    add_common(invertible, c_invertible, true);

    CLI::App* wronskian_cmd = app.add_subcommand(
        "wronskian", "evaluate the (t,s) Wronskian determinant of the given functions");
    wronskian_cmd->add_option("--t", w_t, "x derivative order")->required();
    wronskian_cmd->add_option("--s", w_s, "y derivative order")->required();
    wronskian_cmd->add_option("functions", w_fns, "t+s+1 functions")->required();
    add_common(wronskian_cmd, c_wronskian, false);

    CLI::App* wop = app.add_subcommand(
        "wop", "build the Wronskian transformation operator from kernel elements");
    wop->add_option("--m", w_m, "x derivative order")->required();
    wop->add_option("--n", w_n, "y derivative order")->required();
    wop->add_option("psis", wop_psis, "m+n kernel elements")->required();
    wop->add_option("--operator", wop_file,
                    "operator file: complete and verify N*L = L1*M for each");
    add_common(wop, c_wop, false);

    CLI::App* verify = app.add_subcommand(
        "verify", "check the intertwining identity N*L = L1*M");
    verify->add_option("--N", v_n, "operator N")->required();
    verify->add_option("--L", v_l, "operator L")->required();
    verify->add_option("--L1", v_l1, "operator L1")->required();
    verify->add_option("--M", v_m, "operator M")->required();
    add_common(verify, c_verify, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*check) {
            set_zero_seed(c_check.seed);
            return run_check(f_check, c_check);
        }
        if (*transform) {
            set_zero_seed(c_transform.seed);
            return run_transform(f_transform, psi_src, c_transform);
        }
        if (*invertible) {
            set_zero_seed(c_invertible.seed);
            return run_invertible(f_invertible, c_invertible);
        }
        if (*wronskian_cmd) {
            set_zero_seed(c_wronskian.seed);
            return run_wronskian(w_t, w_s, w_fns, c_wronskian);
        }
        if (*wop) {
            set_zero_seed(c_wop.seed);
            return run_wop(w_m, w_n, wop_psis, wop_file, c_wop);
        }
        if (*verify) {
            set_zero_seed(c_verify.seed);
            return run_verify(v_n, v_l, v_l1, v_m, c_verify);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
