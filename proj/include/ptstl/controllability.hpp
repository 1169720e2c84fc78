// ============================================================================
// ptstl/controllability.hpp — falsifiability of pure-control formulas
// ============================================================================
//
// A formula is controllable when some choice of control values makes it
// false; its violation can then always be forced regardless of the system
// state.  For a pure-control formula the check is an exhaustive search over
// all assignments of domain values to the inputs at lags 0..H, where H is
// the formula's time horizon.  Evaluating at k = H keeps every
// sub-evaluation at or above time 0, so the verdict is exactly
// satisfiability of the negation over control values.
//
// A cause formula phi_u and phi_xu inherits the verdict of its pure-control
// part: a control assignment falsifying phi_u falsifies the conjunction on
// any trace.
// ============================================================================

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ptstl/formula.hpp"
#include "ptstl/rewrite.hpp"
#include "ptstl/trace.hpp"

namespace ptstl {

// values[d][i] is the value of input i at lag d (d steps before the
// evaluation instant), d = 0..H.
struct ControlAssignment {
    std::vector<std::vector<double>> values;
};

struct ControllabilityVerdict {
    bool controllable = false;
    std::optional<ControlAssignment> witness;
    std::uint64_t search_size = 0;  // assignments examined
};

struct ControllabilitySearchLimits {
    std::uint64_t max_assignments = std::uint64_t{1} << 20;
};

namespace detail {

// Builds the synthetic trace encoding an assignment: time H-d carries the
// lag-d control values; states are irrelevant and left at zero.
inline Trace assignment_trace(const ControlAssignment& asg, const SystemSignature& sig) {
    const std::size_t points = asg.values.size();
    Trace tr;
    tr.states.assign(sig.n, std::vector<double>(points, 0.0));
    tr.controls.assign(sig.m, std::vector<double>(points, 0.0));
    for (std::size_t d = 0; d < points; ++d)
        for (std::size_t i = 0; i < sig.m; ++i)
            tr.controls[i][points - 1 - d] = asg.values[d][i];
    return tr;
}

}  // namespace detail

inline ControllabilityVerdict is_controllable_pure(
    const FormulaPtr& f, const SystemSignature& sig,
    const ControllabilitySearchLimits& limits = {},
    const RewriteLimits& rewrite_limits = {}) {
    if (!is_ground(f))
        throw ValidationError("is_controllable_pure: formula contains parameter slots");
    if (classify(f) != AtomClass::PureControl)
        throw ValidationError("is_controllable_pure: formula mentions state variables");

    const unsigned H = horizon(f, rewrite_limits);
    const std::size_t lags = static_cast<std::size_t>(H) + 1;

    // search space size: prod_i |U^i|^(H+1)
    long double space = 1.0L;
    for (const auto& dom : sig.control_domains)
        for (std::size_t d = 0; d < lags; ++d) space *= static_cast<long double>(dom.size());
    if (space > static_cast<long double>(limits.max_assignments))
        throw BudgetError("is_controllable_pure: search space of " +
                          std::to_string(static_cast<double>(space)) +
                          " assignments exceeds cap of " +
                          std::to_string(limits.max_assignments));

    // odometer over digits (lag 0 input 0, lag 0 input 1, ..., lag H input m-1);
    // the last digit cycles fastest, giving lexicographic order
    const std::size_t digits = lags * sig.m;
    std::vector<std::size_t> digit(digits, 0);

    ControlAssignment asg;
    asg.values.assign(lags, std::vector<double>(sig.m, 0.0));
    for (std::size_t d = 0; d < lags; ++d)
        for (std::size_t i = 0; i < sig.m; ++i)
            asg.values[d][i] = sig.control_domains[i].front();

    Trace tr = detail::assignment_trace(asg, sig);

    ControllabilityVerdict verdict;
    while (true) {
        ++verdict.search_size;
        if (!detail::eval_rec(tr, *f, static_cast<long>(H))) {
            verdict.controllable = true;
            verdict.witness = asg;
            return verdict;
        }
        // advance the odometer
        std::size_t pos = digits;
        while (pos > 0) {
            --pos;
            const std::size_t input = pos % sig.m;
            const std::size_t lag = pos / sig.m;
            const auto& dom = sig.control_domains[input];
            if (digit[pos] + 1 < dom.size()) {
                ++digit[pos];
                asg.values[lag][input] = dom[digit[pos]];
                tr.controls[input][lags - 1 - lag] = dom[digit[pos]];
                break;
            }
            digit[pos] = 0;
            asg.values[lag][input] = dom[0];
            tr.controls[input][lags - 1 - lag] = dom[0];
            if (pos == 0) return verdict;  // wrapped around: exhausted
        }
    }
}

// Theorem-1 transfer: the conjunction phi_u && phi_xu is controllable
// whenever phi_u is, with the same witness.
inline ControllabilityVerdict is_controllable_cause(
    const FormulaPtr& phi_u, const FormulaPtr& phi_xu, const SystemSignature& sig,
    const ControllabilitySearchLimits& limits = {},
    const RewriteLimits& rewrite_limits = {}) {
    (void)phi_xu;
    return is_controllable_pure(phi_u, sig, limits, rewrite_limits);
}

// Replaces every literal not(u^i == c) by the disjunction of the remaining
// domain values of input i.  Equivalent on every trace that respects the
// signature.  A singleton domain leaves no alternative; the literal becomes
// not(true).
inline FormulaPtr expand_ctrl_negation(const FormulaPtr& f, const SystemSignature& sig) {
    switch (f->kind) {
        case NodeKind::True:
        case NodeKind::StateLT:
        case NodeKind::StateGT:
        case NodeKind::CtrlEQ:
            return f;
        case NodeKind::Not: {
            const Formula& child = *f->lhs;
            if (child.kind == NodeKind::CtrlEQ && !child.param.is_slot()) {
                const auto& dom = sig.control_domains.at(static_cast<std::size_t>(child.var));
                FormulaPtr acc;
                for (double v : dom) {
                    if (v == child.param.value) continue;
                    FormulaPtr atom = ctrl_eq(child.var, v);
                    acc = acc ? or_of(std::move(acc), std::move(atom)) : std::move(atom);
                }
                return acc ? acc : not_of(true_const());
            }
            return not_of(expand_ctrl_negation(f->lhs, sig));
        }
        case NodeKind::Shift:
            return shifted(f->shift, expand_ctrl_negation(f->lhs, sig));
        case NodeKind::And:
            return and_of(expand_ctrl_negation(f->lhs, sig), expand_ctrl_negation(f->rhs, sig));
        case NodeKind::Or:
            return or_of(expand_ctrl_negation(f->lhs, sig), expand_ctrl_negation(f->rhs, sig));
        case NodeKind::Prev:
            return prev(expand_ctrl_negation(f->lhs, sig), f->window);
        case NodeKind::Hist:
            return hist(expand_ctrl_negation(f->lhs, sig), f->window);
        case NodeKind::Since:
            return since(expand_ctrl_negation(f->lhs, sig), expand_ctrl_negation(f->rhs, sig),
                         f->window);
    }
    return f;
}

}  // namespace ptstl
