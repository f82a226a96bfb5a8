#pragma once

#include <stdexcept>
#include <string>

namespace darboux {

enum class Errc {
    division_by_zero,
    undecided_after_retries,
    pole_at_point,
    domain_error,
    zero_operator,
    zero_gauge,
    condition_violated,
    not_applicable,
    not_in_kernel,
    too_few_solutions,
    ratio_not_separated,
    wronskian_vanishes,
    denominator_vanishes,
    size_mismatch,
    not_hyperbolic_normal_form,
    zero_invariant,
    gauge_not_representable,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::division_by_zero: return "DivisionByZero";
        case Errc::undecided_after_retries: return "UndecidedAfterRetries";
        case Errc::pole_at_point: return "PoleAtPoint";
        case Errc::domain_error: return "DomainError";
        case Errc::zero_operator: return "ZeroOperator";
        case Errc::zero_gauge: return "ZeroGauge";
        case Errc::condition_violated: return "ConditionViolated";
        case Errc::not_applicable: return "NotApplicable";
        case Errc::not_in_kernel: return "NotInKernel";
        case Errc::too_few_solutions: return "TooFewSolutions";
        case Errc::ratio_not_separated: return "RatioNotSeparated";
        case Errc::wronskian_vanishes: return "WronskianVanishes";
        case Errc::size_mismatch: return "SizeMismatch";
        case Errc::denominator_vanishes: return "DenominatorVanishes";
        case Errc::not_hyperbolic_normal_form: return "NotHyperbolicNormalForm";
        case Errc::zero_invariant: return "ZeroInvariant";
        case Errc::gauge_not_representable: return "GaugeNotRepresentable";
    }
    return "Error";
}

struct Error : std::runtime_error {
    Errc code;
    long aux;  // detail index: required count, offending psi index, ...

    explicit Error(Errc c, const std::string& msg, long aux_ = -1)
        : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code(c), aux(aux_) {}
};

}  // namespace darboux
