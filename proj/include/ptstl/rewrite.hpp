// ============================================================================
// ptstl/rewrite.hpp — X-normal form, negation normal form, CNF
// ============================================================================
//
// The rewrite chain eliminates the temporal operators in favour of shift
// chains:
//
//   G^-_[a,b] p  =  X^b p and X^{b+1} p and ... and X^a p
//   F^-_[a,b] p  =  X^b p or ... or X^a p
//   p S_[a,b] q  =  OR_{t=b..a} ( X^t q and AND_{t'=b..t} X^{t'} p )
//   X^n (p and q) = X^n p and X^n q      (likewise for or)
//
// and then drives negations down to literals.  Every step preserves the
// evaluator's boundary semantics (below-0 is false) *exactly*, at every
// time point.  Two consequences of that requirement:
//
//   * X^n (not p) is NOT equivalent to not (X^n p): at k < n the former is
//     false while the latter is true.  A shift is therefore moved across a
//     negation with a time guard:  X^n (not p) = X^n true and not (X^n p).
//   * Negations are never pushed inside a shift.  Literals are shifted,
//     possibly negated, atoms: X^n a or not (X^n a).
//
// All rewrites charge a node budget; exceeding it raises BudgetError rather
// than truncating.
// ============================================================================

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ptstl/formula.hpp"

namespace ptstl {

struct RewriteLimits {
    std::size_t max_nodes = 1'000'000;  // nodes constructed per rewrite call
};

namespace detail {

struct NodeBudget {
    std::size_t remaining;

    void charge(std::size_t n = 1) {
        if (n > remaining)
            throw BudgetError("rewrite: node budget exceeded");
        remaining -= n;
    }
};

inline FormulaPtr xnf_rec(const FormulaPtr& f, unsigned shift_n, NodeBudget& budget) {
    switch (f->kind) {
        case NodeKind::True:
        case NodeKind::StateLT:
        case NodeKind::StateGT:
        case NodeKind::CtrlEQ:
            budget.charge();
            return shifted(shift_n, f);
        case NodeKind::Shift:
            return xnf_rec(f->lhs, shift_n + f->shift, budget);
        case NodeKind::And:
            budget.charge();
            return and_of(xnf_rec(f->lhs, shift_n, budget), xnf_rec(f->rhs, shift_n, budget));
        case NodeKind::Or:
            budget.charge();
            return or_of(xnf_rec(f->lhs, shift_n, budget), xnf_rec(f->rhs, shift_n, budget));
        case NodeKind::Not: {
            budget.charge();
            FormulaPtr body = not_of(xnf_rec(f->lhs, shift_n, budget));
            if (shift_n == 0) return body;
            // time guard keeps the below-0 semantics intact
            budget.charge(2);
            return and_of(shifted(shift_n, true_const()), std::move(body));
        }
        case NodeKind::Prev:
        case NodeKind::Hist: {
            const Window w = f->window.win;
            FormulaPtr acc;
            for (unsigned t = w.b; t <= w.a; ++t) {
                FormulaPtr term = xnf_rec(f->lhs, shift_n + t, budget);
                if (!acc) {
                    acc = std::move(term);
                } else {
                    budget.charge();
                    acc = f->kind == NodeKind::Prev ? or_of(std::move(acc), std::move(term))
                                                    : and_of(std::move(acc), std::move(term));
                }
            }
            return acc;
        }
        case NodeKind::Since: {
            const Window w = f->window.win;
            FormulaPtr acc;
            for (unsigned t = w.b; t <= w.a; ++t) {
                FormulaPtr term = xnf_rec(f->rhs, shift_n + t, budget);
                for (unsigned s = w.b; s <= t; ++s) {
                    budget.charge();
                    term = and_of(std::move(term), xnf_rec(f->lhs, shift_n + s, budget));
                }
                if (!acc) {
                    acc = std::move(term);
                } else {
                    budget.charge();
                    acc = or_of(std::move(acc), std::move(term));
                }
            }
            return acc;
        }
    }
    return f;
}

inline FormulaPtr nnf_rec(const FormulaPtr& f, bool neg, NodeBudget& budget) {
    switch (f->kind) {
        case NodeKind::Not:
            return nnf_rec(f->lhs, !neg, budget);
        case NodeKind::And:
            budget.charge();
            return neg ? or_of(nnf_rec(f->lhs, true, budget), nnf_rec(f->rhs, true, budget))
                       : and_of(nnf_rec(f->lhs, false, budget), nnf_rec(f->rhs, false, budget));
        case NodeKind::Or:
            budget.charge();
            return neg ? and_of(nnf_rec(f->lhs, true, budget), nnf_rec(f->rhs, true, budget))
                       : or_of(nnf_rec(f->lhs, false, budget), nnf_rec(f->rhs, false, budget));
        default:
            // literal base: atom, true, or a shifted atom
            if (!neg) return f;
            budget.charge();
            return not_of(f);
    }
}

}  // namespace detail

// Removes Since/Prev/Hist and pushes shifts down until every shift sits
// directly above an atom (or the constant true, whose shift is a time
// guard).  The input must be ground.
inline FormulaPtr to_x_normal_form(const FormulaPtr& f, const RewriteLimits& limits = {}) {
    if (!is_ground(f)) throw ValidationError("to_x_normal_form: formula contains slots");
    detail::NodeBudget budget{limits.max_nodes};
    return detail::xnf_rec(f, 0, budget);
}

// Drives negations down to literals: double negations cancel and De Morgan
// distributes over and/or.  Negations are not moved across shifts (the
// boundary semantics does not allow it), so literals come out as possibly
// negated shifted atoms.  Expects X-normal-form input; any non-Boolean node
// is treated as an opaque literal base.
inline FormulaPtr push_negations(const FormulaPtr& f, const RewriteLimits& limits = {}) {
    detail::NodeBudget budget{limits.max_nodes};
    return detail::nnf_rec(f, false, budget);
}

// One CNF clause: a disjunction of literals.  `pure_control` is set when
// every literal's underlying atom is a control equality.
struct Clause {
    std::vector<FormulaPtr> literals;
    bool pure_control = false;

    FormulaPtr to_formula() const {
        FormulaPtr acc;
        for (const auto& lit : literals) acc = acc ? or_of(acc, lit) : lit;
        return acc;
    }
};

namespace detail {

inline const Formula& literal_base(const Formula& lit) {
    const Formula* f = &lit;
    while (f->kind == NodeKind::Not || f->kind == NodeKind::Shift) f = f->lhs.get();
    return *f;
}

inline bool clause_is_pure_control(const std::vector<FormulaPtr>& lits) {
    for (const auto& lit : lits)
        if (literal_base(*lit).kind != NodeKind::CtrlEQ) return false;
    return !lits.empty();
}

inline void cnf_rec(const FormulaPtr& f, std::vector<std::vector<FormulaPtr>>& clauses,
                    std::size_t max_literals, std::size_t& literal_count) {
    if (f->kind == NodeKind::And) {
        cnf_rec(f->lhs, clauses, max_literals, literal_count);
        cnf_rec(f->rhs, clauses, max_literals, literal_count);
        return;
    }
    if (f->kind == NodeKind::Or) {
        std::vector<std::vector<FormulaPtr>> left;
        std::vector<std::vector<FormulaPtr>> right;
        std::size_t sub = 0;
        cnf_rec(f->lhs, left, max_literals, sub);
        cnf_rec(f->rhs, right, max_literals, sub);
        for (const auto& cl : left) {
            for (const auto& cr : right) {
                std::vector<FormulaPtr> merged = cl;
                merged.insert(merged.end(), cr.begin(), cr.end());
                literal_count += merged.size();
                if (literal_count > max_literals)
                    throw BudgetError("to_cnf: clause budget exceeded");
                clauses.push_back(std::move(merged));
            }
        }
        return;
    }
    literal_count += 1;
    if (literal_count > max_literals) throw BudgetError("to_cnf: clause budget exceeded");
    clauses.push_back({f});
}

}  // namespace detail

// Conjunctive normal form of an X-normal, negation-normal formula.  Literals
// within a clause are deduplicated and sorted under the canonical key order,
// so the output is deterministic.
inline std::vector<Clause> to_cnf(const FormulaPtr& f, const RewriteLimits& limits = {}) {
    std::vector<std::vector<FormulaPtr>> raw;
    std::size_t literal_count = 0;
    detail::cnf_rec(f, raw, limits.max_nodes, literal_count);

    std::vector<Clause> out;
    out.reserve(raw.size());
    for (auto& lits : raw) {
        std::sort(lits.begin(), lits.end(), [](const FormulaPtr& a, const FormulaPtr& b) {
            return canonical_key(a) < canonical_key(b);
        });
        lits.erase(std::unique(lits.begin(), lits.end(),
                               [](const FormulaPtr& a, const FormulaPtr& b) {
                                   return canonical_key(a) == canonical_key(b);
                               }),
                   lits.end());
        Clause c;
        c.pure_control = detail::clause_is_pure_control(lits);
        c.literals = std::move(lits);
        out.push_back(std::move(c));
    }
    return out;
}

// Time horizon: the maximum shift depth of the X-normal form, i.e. how far
// into the past the formula can look.
inline unsigned horizon(const FormulaPtr& f, const RewriteLimits& limits = {}) {
    struct Scan {
        static unsigned max_shift(const Formula& f) {
            unsigned best = 0;
            if (f.kind == NodeKind::Shift) best = f.shift;
            if (f.lhs) best = std::max(best, max_shift(*f.lhs));
            if (f.rhs) best = std::max(best, max_shift(*f.rhs));
            return best;
        }
    };
    FormulaPtr x = to_x_normal_form(f, limits);
    return Scan::max_shift(*x);
}

}  // namespace ptstl
