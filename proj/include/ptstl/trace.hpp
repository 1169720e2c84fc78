// ============================================================================
// ptstl/trace.hpp — traces, labels, datasets, and Boolean monitoring
// ============================================================================
//
// Two evaluators are provided:
//
//   eval_at     — the reference semantics, a direct recursion over the
//                 formula.  Slow but obviously correct; every other
//                 evaluation path in the library is tested against it.
//   eval_signal — bulk evaluation of all time points bottom-up per
//                 subformula, with prefix-sum sliding windows, so the cost
//                 is O(points * subformulas) independent of window widths.
//
// Boundary semantics: any evaluation at a time index below 0 is false,
// regardless of the formula.  In particular X^n phi is false at k < n,
// F^-_[a,b] phi is false wherever the window lies fully below 0, and
// G^-_[a,b] phi is false wherever the window reaches below 0.  This is the
// unique convention under which X, F^-_[1,1] and G^-_[1,1] coincide at
// every time point, including k = 0.
// ============================================================================

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ptstl/formula.hpp"
#include "ptstl/signature.hpp"

namespace ptstl {

// Column-major trace: states[j][k] is x^j at time k, controls[i][k] is u^i.
struct Trace {
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> controls;

    // Number of time points (N+1).
    std::size_t length() const noexcept {
        if (!states.empty()) return states.front().size();
        if (!controls.empty()) return controls.front().size();
        return 0;
    }

    void validate(const SystemSignature& sig) const {
        if (states.size() != sig.n || controls.size() != sig.m)
            throw ValidationError("trace: dimension mismatch with signature");
        const std::size_t len = length();
        if (len == 0) throw ValidationError("trace: must have at least one time point");
        for (const auto& col : states)
            if (col.size() != len) throw ValidationError("trace: ragged state columns");
        for (std::size_t i = 0; i < controls.size(); ++i) {
            if (controls[i].size() != len) throw ValidationError("trace: ragged control columns");
            for (std::size_t k = 0; k < len; ++k) {
                if (!sig.control_value_allowed(i, controls[i][k]))
                    throw ValidationError("trace: control value " +
                                          detail::fmt_num(controls[i][k]) + " for u" +
                                          std::to_string(i) + " at t=" + std::to_string(k) +
                                          " not in declared domain");
            }
        }
    }
};

struct LabelSeq {
    std::vector<std::uint8_t> bits;  // 0/1 per time point
};

struct Dataset {
    SystemSignature signature;
    std::vector<std::pair<Trace, LabelSeq>> items;

    std::size_t total_points() const noexcept {
        std::size_t n = 0;
        for (const auto& it : items) n += it.first.length();
        return n;
    }

    void validate() const {
        signature.validate();
        for (const auto& [tr, labels] : items) {
            tr.validate(signature);
            if (labels.bits.size() != tr.length())
                throw ValidationError("dataset: label sequence length differs from trace");
            for (auto b : labels.bits)
                if (b > 1) throw ValidationError("dataset: label not in {0,1}");
        }
    }
};

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
};

// F_beta = (1+b^2) tp / ((1+b^2) tp + b^2 fn + fp), and 0 when the
// denominator vanishes.
inline double f_beta(const Confusion& c, double beta) {
    if (beta <= 0.0) throw ValidationError("f_beta: beta must be positive");
    const double b2 = beta * beta;
    const double denom = (1.0 + b2) * static_cast<double>(c.tp) +
                         b2 * static_cast<double>(c.fn) + static_cast<double>(c.fp);
    if (denom == 0.0) return 0.0;
    return (1.0 + b2) * static_cast<double>(c.tp) / denom;
}

// ── Reference evaluator ─────────────────────────────────────────────────────

namespace detail {

inline bool eval_rec(const Trace& tr, const Formula& f, long k) {
    if (k < 0) return false;
    switch (f.kind) {
        case NodeKind::True:
            return true;
        case NodeKind::StateLT:
            return tr.states[static_cast<std::size_t>(f.var)][static_cast<std::size_t>(k)] <
                   f.param.value;
        case NodeKind::StateGT:
            return tr.states[static_cast<std::size_t>(f.var)][static_cast<std::size_t>(k)] >
                   f.param.value;
        case NodeKind::CtrlEQ:
            return tr.controls[static_cast<std::size_t>(f.var)][static_cast<std::size_t>(k)] ==
                   f.param.value;
        case NodeKind::Not:
            return !eval_rec(tr, *f.lhs, k);
        case NodeKind::And:
            return eval_rec(tr, *f.lhs, k) && eval_rec(tr, *f.rhs, k);
        case NodeKind::Or:
            return eval_rec(tr, *f.lhs, k) || eval_rec(tr, *f.rhs, k);
        case NodeKind::Shift:
            return eval_rec(tr, *f.lhs, k - static_cast<long>(f.shift));
        case NodeKind::Prev: {
            const long lo = k - static_cast<long>(f.window.win.a);
            const long hi = k - static_cast<long>(f.window.win.b);
            for (long t = lo; t <= hi; ++t)
                if (t >= 0 && eval_rec(tr, *f.lhs, t)) return true;
            return false;
        }
        case NodeKind::Hist: {
            const long lo = k - static_cast<long>(f.window.win.a);
            const long hi = k - static_cast<long>(f.window.win.b);
            for (long t = lo; t <= hi; ++t)
                if (t < 0 || !eval_rec(tr, *f.lhs, t)) return false;
            return true;
        }
        case NodeKind::Since: {
            // rhs held at some t in the window, lhs at every instant of
            // [t, k-b] (inclusive of t itself).
            const long lo = k - static_cast<long>(f.window.win.a);
            const long hi = k - static_cast<long>(f.window.win.b);
            for (long t = lo; t <= hi; ++t) {
                if (t < 0 || !eval_rec(tr, *f.rhs, t)) continue;
                bool all = true;
                for (long s = t; s <= hi; ++s) {
                    if (!eval_rec(tr, *f.lhs, s)) {
                        all = false;
                        break;
                    }
                }
                if (all) return true;
            }
            return false;
        }
    }
    return false;
}

}  // namespace detail

inline bool eval_at(const Trace& tr, const FormulaPtr& f, std::size_t k) {
    if (!is_ground(f)) throw ValidationError("eval_at: formula contains parameter slots");
    if (k >= tr.length())
        throw ValidationError("eval_at: time index " + std::to_string(k) +
                              " out of range for trace of length " +
                              std::to_string(tr.length()));
    return detail::eval_rec(tr, *f, static_cast<long>(k));
}

// ── Bulk evaluator ──────────────────────────────────────────────────────────

using BoolSignal = std::vector<std::uint8_t>;

namespace detail {

// prefix[i] = number of set entries in sig[0..i-1]
inline std::vector<std::uint32_t> prefix_counts(const BoolSignal& sig) {
    std::vector<std::uint32_t> p(sig.size() + 1, 0);
    for (std::size_t i = 0; i < sig.size(); ++i) p[i + 1] = p[i] + sig[i];
    return p;
}

inline BoolSignal eval_signal_rec(const Trace& tr, const Formula& f) {
    const std::size_t len = tr.length();
    BoolSignal out(len, 0);
    switch (f.kind) {
        case NodeKind::True:
            out.assign(len, 1);
            return out;
        case NodeKind::StateLT:
        case NodeKind::StateGT: {
            const auto& col = tr.states[static_cast<std::size_t>(f.var)];
            const double c = f.param.value;
            if (f.kind == NodeKind::StateLT)
                for (std::size_t k = 0; k < len; ++k) out[k] = col[k] < c;
            else
                for (std::size_t k = 0; k < len; ++k) out[k] = col[k] > c;
            return out;
        }
        case NodeKind::CtrlEQ: {
            const auto& col = tr.controls[static_cast<std::size_t>(f.var)];
            const double c = f.param.value;
            for (std::size_t k = 0; k < len; ++k) out[k] = col[k] == c;
            return out;
        }
        case NodeKind::Not: {
            BoolSignal a = eval_signal_rec(tr, *f.lhs);
            for (std::size_t k = 0; k < len; ++k) out[k] = !a[k];
            return out;
        }
        case NodeKind::And: {
            BoolSignal a = eval_signal_rec(tr, *f.lhs);
            BoolSignal b = eval_signal_rec(tr, *f.rhs);
            for (std::size_t k = 0; k < len; ++k) out[k] = a[k] & b[k];
            return out;
        }
        case NodeKind::Or: {
            BoolSignal a = eval_signal_rec(tr, *f.lhs);
            BoolSignal b = eval_signal_rec(tr, *f.rhs);
            for (std::size_t k = 0; k < len; ++k) out[k] = a[k] | b[k];
            return out;
        }
        case NodeKind::Shift: {
            BoolSignal a = eval_signal_rec(tr, *f.lhs);
            const std::size_t n = f.shift;
            for (std::size_t k = n; k < len; ++k) out[k] = a[k - n];
            return out;
        }
        case NodeKind::Prev: {
            BoolSignal a = eval_signal_rec(tr, *f.lhs);
            auto pre = prefix_counts(a);
            const long wa = static_cast<long>(f.window.win.a);
            const long wb = static_cast<long>(f.window.win.b);
            for (std::size_t k = 0; k < len; ++k) {
                const long hi = static_cast<long>(k) - wb;
                if (hi < 0) continue;
                const long lo = std::max<long>(0, static_cast<long>(k) - wa);
                out[k] = pre[static_cast<std::size_t>(hi) + 1] - pre[static_cast<std::size_t>(lo)] > 0;
            }
            return out;
        }
        case NodeKind::Hist: {
            BoolSignal a = eval_signal_rec(tr, *f.lhs);
            auto pre = prefix_counts(a);
            const long wa = static_cast<long>(f.window.win.a);
            const long wb = static_cast<long>(f.window.win.b);
            for (std::size_t k = 0; k < len; ++k) {
                const long lo = static_cast<long>(k) - wa;
                if (lo < 0) continue;  // window reaches below 0
                const long hi = static_cast<long>(k) - wb;
                const std::uint32_t need = static_cast<std::uint32_t>(hi - lo + 1);
                out[k] = pre[static_cast<std::size_t>(hi) + 1] - pre[static_cast<std::size_t>(lo)] == need;
            }
            return out;
        }
        case NodeKind::Since: {
            BoolSignal p = eval_signal_rec(tr, *f.lhs);
            BoolSignal q = eval_signal_rec(tr, *f.rhs);
            auto qpre = prefix_counts(q);
            // run[t] = length of the maximal all-true run of p ending at t
            std::vector<std::uint32_t> run(len, 0);
            for (std::size_t t = 0; t < len; ++t) run[t] = p[t] ? (t ? run[t - 1] + 1 : 1) : 0;
            const long wa = static_cast<long>(f.window.win.a);
            const long wb = static_cast<long>(f.window.win.b);
            for (std::size_t k = 0; k < len; ++k) {
                const long hi = static_cast<long>(k) - wb;
                if (hi < 0) continue;
                // p must hold on [t, hi]  <=>  t >= hi - run[hi] + 1
                const long lo = std::max<long>(
                    {0, static_cast<long>(k) - wa,
                     hi - static_cast<long>(run[static_cast<std::size_t>(hi)]) + 1});
                if (lo > hi) continue;
                out[k] = qpre[static_cast<std::size_t>(hi) + 1] - qpre[static_cast<std::size_t>(lo)] > 0;
            }
            return out;
        }
    }
    return out;
}

}  // namespace detail

inline BoolSignal eval_signal(const Trace& tr, const FormulaPtr& f) {
    if (!is_ground(f)) throw ValidationError("eval_signal: formula contains parameter slots");
    return detail::eval_signal_rec(tr, *f);
}

// Pooled confusion counts over every time point of every trace.
inline Confusion confusion(const Dataset& ds, const FormulaPtr& f) {
    Confusion c;
    for (const auto& [tr, labels] : ds.items) {
        BoolSignal pred = eval_signal(tr, f);
        for (std::size_t k = 0; k < pred.size(); ++k) {
            const bool p = pred[k] != 0;
            const bool l = labels.bits[k] != 0;
            if (p && l)
                ++c.tp;
            else if (p && !l)
                ++c.fp;
            else if (!p && l)
                ++c.fn;
            else
                ++c.tn;
        }
    }
    return c;
}

}  // namespace ptstl
