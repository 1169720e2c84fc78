// ============================================================================
// ptstl/formula.hpp — past-time STL abstract syntax
// ============================================================================
//
// Formula nodes form an immutable tree shared through shared_ptr<const>.
// The same node type doubles as a formula template: atom parameters and
// temporal windows may be slot placeholders instead of concrete values.
// A formula with no slots is called "ground".
//
// Grammar of atoms: x^j > c | x^j < c | u^i = c | true.  Threshold atoms
// exist only for state variables and equality atoms only for control
// inputs; the constructors make other combinations unrepresentable.
//
// Temporal nodes carry windows [k-a, k-b] with a >= b >= 0.  The shift
// node X^n ("n steps earlier") is kept flat: constructing a shift of a
// shift merges the offsets, and X^0 is the identity.
// ============================================================================

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ptstl/errors.hpp"
#include "ptstl/signature.hpp"

namespace ptstl {

enum class NodeKind : std::uint8_t {
    True,
    StateLT,   // x^var < param
    StateGT,   // x^var > param
    CtrlEQ,    // u^var = param
    Not,
    And,
    Or,
    Since,     // lhs S_[a,b] rhs
    Prev,      // F^-_[a,b] lhs  (held at least once in the window)
    Hist,      // G^-_[a,b] lhs  (held at every instant of the window)
    Shift,     // X^shift lhs
};

enum class SlotKind : std::uint8_t { StateThreshold, ControlValue, WindowPair };

// A template parameter slot.  `index` names the state variable
// (StateThreshold) or control input (ControlValue) the slot belongs to;
// it is unused for WindowPair slots.
struct Slot {
    std::string name;
    SlotKind kind{};
    int index = -1;
};

using SlotPtr = std::shared_ptr<const Slot>;

// Scalar atom parameter: either a concrete value or a slot.
struct Param {
    double value = 0.0;
    SlotPtr slot;

    bool is_slot() const noexcept { return slot != nullptr; }

    static Param of(double v) { return Param{v, nullptr}; }
    static Param hole(SlotPtr s) { return Param{0.0, std::move(s)}; }
};

// Temporal window [k-a, k-b].
struct Window {
    unsigned a = 0;
    unsigned b = 0;

    unsigned width() const noexcept { return a - b + 1; }
    friend bool operator==(const Window& x, const Window& y) noexcept {
        return x.a == y.a && x.b == y.b;
    }
};

inline Window make_window(unsigned a, unsigned b) {
    if (a < b)
        throw ValidationError("window [" + std::to_string(a) + "," + std::to_string(b) +
                              "]: bounds must satisfy a >= b");
    return Window{a, b};
}

struct WindowParam {
    Window win{};
    SlotPtr slot;

    bool is_slot() const noexcept { return slot != nullptr; }

    static WindowParam of(unsigned a, unsigned b) { return WindowParam{make_window(a, b), nullptr}; }
    static WindowParam of(Window w) { return WindowParam{make_window(w.a, w.b), nullptr}; }
    static WindowParam hole(SlotPtr s) { return WindowParam{Window{}, std::move(s)}; }
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
public:
    NodeKind kind = NodeKind::True;
    int var = 0;          // state variable / control input index of an atom
    Param param{};        // atom threshold or control value
    WindowParam window{}; // Since/Prev/Hist only
    unsigned shift = 0;   // Shift only
    FormulaPtr lhs;
    FormulaPtr rhs;       // Since only

    bool is_atom() const noexcept {
        return kind == NodeKind::True || kind == NodeKind::StateLT ||
               kind == NodeKind::StateGT || kind == NodeKind::CtrlEQ;
    }
    bool is_temporal() const noexcept {
        return kind == NodeKind::Since || kind == NodeKind::Prev || kind == NodeKind::Hist;
    }
};

// ── Constructors ────────────────────────────────────────────────────────────

inline FormulaPtr true_const() {
    static const FormulaPtr t = std::make_shared<Formula>();
    return t;
}

inline FormulaPtr state_lt(int var, Param threshold) {
    if (var < 0) throw ValidationError("state atom: negative variable index");
    auto f = std::make_shared<Formula>();
    f->kind = NodeKind::StateLT;
    f->var = var;
    f->param = std::move(threshold);
    return f;
}

inline FormulaPtr state_gt(int var, Param threshold) {
    if (var < 0) throw ValidationError("state atom: negative variable index");
    auto f = std::make_shared<Formula>();
    f->kind = NodeKind::StateGT;
    f->var = var;
    f->param = std::move(threshold);
    return f;
}

inline FormulaPtr ctrl_eq(int input, Param value) {
    if (input < 0) throw ValidationError("control atom: negative input index");
    auto f = std::make_shared<Formula>();
    f->kind = NodeKind::CtrlEQ;
    f->var = input;
    f->param = std::move(value);
    return f;
}

inline FormulaPtr state_lt(int var, double c) { return state_lt(var, Param::of(c)); }
inline FormulaPtr state_gt(int var, double c) { return state_gt(var, Param::of(c)); }
inline FormulaPtr ctrl_eq(int input, double c) { return ctrl_eq(input, Param::of(c)); }

inline FormulaPtr not_of(FormulaPtr f) {
    auto r = std::make_shared<Formula>();
    r->kind = NodeKind::Not;
    r->lhs = std::move(f);
    return r;
}

inline FormulaPtr and_of(FormulaPtr a, FormulaPtr b) {
    auto r = std::make_shared<Formula>();
    r->kind = NodeKind::And;
    r->lhs = std::move(a);
    r->rhs = std::move(b);
    return r;
}

inline FormulaPtr or_of(FormulaPtr a, FormulaPtr b) {
    auto r = std::make_shared<Formula>();
    r->kind = NodeKind::Or;
    r->lhs = std::move(a);
    r->rhs = std::move(b);
    return r;
}

inline FormulaPtr since(FormulaPtr a, FormulaPtr b, WindowParam w) {
    auto r = std::make_shared<Formula>();
    r->kind = NodeKind::Since;
    r->lhs = std::move(a);
    r->rhs = std::move(b);
    r->window = std::move(w);
    return r;
}

inline FormulaPtr prev(FormulaPtr f, WindowParam w) {
    auto r = std::make_shared<Formula>();
    r->kind = NodeKind::Prev;
    r->lhs = std::move(f);
    r->window = std::move(w);
    return r;
}

inline FormulaPtr hist(FormulaPtr f, WindowParam w) {
    auto r = std::make_shared<Formula>();
    r->kind = NodeKind::Hist;
    r->lhs = std::move(f);
    r->window = std::move(w);
    return r;
}

inline FormulaPtr since(FormulaPtr a, FormulaPtr b, unsigned wa, unsigned wb) {
    return since(std::move(a), std::move(b), WindowParam::of(wa, wb));
}
inline FormulaPtr prev(FormulaPtr f, unsigned wa, unsigned wb) {
    return prev(std::move(f), WindowParam::of(wa, wb));
}
inline FormulaPtr hist(FormulaPtr f, unsigned wa, unsigned wb) {
    return hist(std::move(f), WindowParam::of(wa, wb));
}

// X^n.  Nested shifts merge; X^0 is the identity.
inline FormulaPtr shifted(unsigned n, FormulaPtr f) {
    if (f->kind == NodeKind::Shift) {
        n += f->shift;
        f = f->lhs;
    }
    if (n == 0) return f;
    auto r = std::make_shared<Formula>();
    r->kind = NodeKind::Shift;
    r->shift = n;
    r->lhs = std::move(f);
    return r;
}

// ── Number formatting ───────────────────────────────────────────────────────
// Shortest decimal string that parses back to the same double.  Shared by
// the pretty-printer, canonical keys, and the dataset files so that every
// serialised number round-trips exactly.

namespace detail {

inline std::string fmt_num(double v) {
    if (v == 0.0) return "0";
    if (std::abs(v) < 9.0e15) {
        long long i = static_cast<long long>(v);
        if (static_cast<double>(i) == v) return std::to_string(i);
    }
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace detail

// ── Structural queries ──────────────────────────────────────────────────────

// Operator count: occurrences of {and, or, not, S, F^-, G^-}.  Shift nodes,
// atoms and the true constant do not contribute.
inline unsigned op_count(const FormulaPtr& f) {
    switch (f->kind) {
        case NodeKind::True:
        case NodeKind::StateLT:
        case NodeKind::StateGT:
        case NodeKind::CtrlEQ:
            return 0;
        case NodeKind::Shift:
            return op_count(f->lhs);
        case NodeKind::Not:
        case NodeKind::Prev:
        case NodeKind::Hist:
            return 1 + op_count(f->lhs);
        case NodeKind::And:
        case NodeKind::Or:
        case NodeKind::Since:
            return 1 + op_count(f->lhs) + op_count(f->rhs);
    }
    return 0;
}

inline bool is_ground(const FormulaPtr& f) {
    switch (f->kind) {
        case NodeKind::True:
            return true;
        case NodeKind::StateLT:
        case NodeKind::StateGT:
        case NodeKind::CtrlEQ:
            return !f->param.is_slot();
        case NodeKind::Not:
        case NodeKind::Shift:
            return is_ground(f->lhs);
        case NodeKind::Prev:
        case NodeKind::Hist:
            return !f->window.is_slot() && is_ground(f->lhs);
        case NodeKind::Since:
            return !f->window.is_slot() && is_ground(f->lhs) && is_ground(f->rhs);
        case NodeKind::And:
        case NodeKind::Or:
            return is_ground(f->lhs) && is_ground(f->rhs);
    }
    return true;
}

enum class AtomClass : std::uint8_t { PureControl, Mixed, PureState };

namespace detail {

inline void count_atoms(const FormulaPtr& f, unsigned& state_atoms, unsigned& ctrl_atoms) {
    switch (f->kind) {
        case NodeKind::True:
            return;
        case NodeKind::StateLT:
        case NodeKind::StateGT:
            ++state_atoms;
            return;
        case NodeKind::CtrlEQ:
            ++ctrl_atoms;
            return;
        case NodeKind::Not:
        case NodeKind::Shift:
        case NodeKind::Prev:
        case NodeKind::Hist:
            count_atoms(f->lhs, state_atoms, ctrl_atoms);
            return;
        case NodeKind::And:
        case NodeKind::Or:
        case NodeKind::Since:
            count_atoms(f->lhs, state_atoms, ctrl_atoms);
            count_atoms(f->rhs, state_atoms, ctrl_atoms);
            return;
    }
}

}  // namespace detail

// Pure-control when no state atom occurs, pure-state when no control atom
// occurs.  A formula with no atoms at all (bare `true` combinations)
// classifies as pure-control.
inline AtomClass classify(const FormulaPtr& f) {
    unsigned state_atoms = 0;
    unsigned ctrl_atoms = 0;
    detail::count_atoms(f, state_atoms, ctrl_atoms);
    if (state_atoms == 0) return AtomClass::PureControl;
    if (ctrl_atoms == 0) return AtomClass::PureState;
    return AtomClass::Mixed;
}

// ── Slots and substitution ──────────────────────────────────────────────────

namespace detail {

inline void collect_slots_rec(const FormulaPtr& f, std::vector<SlotPtr>& out) {
    auto add = [&out](const SlotPtr& s) {
        for (const auto& seen : out) {
            if (seen->name == s->name) {
                if (seen->kind != s->kind || seen->index != s->index)
                    throw ValidationError("slot '" + s->name +
                                          "' used with conflicting kinds");
                return;
            }
        }
        out.push_back(s);
    };
    switch (f->kind) {
        case NodeKind::True:
            return;
        case NodeKind::StateLT:
        case NodeKind::StateGT:
        case NodeKind::CtrlEQ:
            if (f->param.is_slot()) add(f->param.slot);
            return;
        case NodeKind::Not:
        case NodeKind::Shift:
            collect_slots_rec(f->lhs, out);
            return;
        case NodeKind::Prev:
        case NodeKind::Hist:
            if (f->window.is_slot()) add(f->window.slot);
            collect_slots_rec(f->lhs, out);
            return;
        case NodeKind::Since:
            if (f->window.is_slot()) add(f->window.slot);
            collect_slots_rec(f->lhs, out);
            collect_slots_rec(f->rhs, out);
            return;
        case NodeKind::And:
        case NodeKind::Or:
            collect_slots_rec(f->lhs, out);
            collect_slots_rec(f->rhs, out);
            return;
    }
}

}  // namespace detail

// Distinct slots in first-occurrence (left-to-right) order.  Reusing a slot
// name with a different kind or index is rejected.
inline std::vector<SlotPtr> collect_slots(const FormulaPtr& f) {
    std::vector<SlotPtr> out;
    detail::collect_slots_rec(f, out);
    return out;
}

using SlotValue = std::variant<double, Window>;
using Valuation = std::map<std::string, SlotValue>;

namespace detail {

inline double scalar_for(const Slot& slot, const Valuation& v, const SystemSignature* sig) {
    auto it = v.find(slot.name);
    if (it == v.end())
        throw ValidationError("substitute: no value for slot '" + slot.name + "'");
    const double* d = std::get_if<double>(&it->second);
    if (!d)
        throw ValidationError("substitute: slot '" + slot.name +
                              "' expects a scalar, got a window");
    if (slot.kind == SlotKind::ControlValue && sig) {
        if (!sig->control_value_allowed(static_cast<std::size_t>(slot.index), *d))
            throw ValidationError("substitute: value " + fmt_num(*d) +
                                  " outside domain of control input " +
                                  std::to_string(slot.index));
    }
    return *d;
}

inline Window window_for(const Slot& slot, const Valuation& v) {
    auto it = v.find(slot.name);
    if (it == v.end())
        throw ValidationError("substitute: no value for slot '" + slot.name + "'");
    const Window* w = std::get_if<Window>(&it->second);
    if (!w)
        throw ValidationError("substitute: slot '" + slot.name +
                              "' expects a window, got a scalar");
    return make_window(w->a, w->b);
}

}  // namespace detail

// Replaces every slot by its value from `v`.  When a signature is supplied,
// control values are checked against their input's domain.
inline FormulaPtr substitute(const FormulaPtr& f, const Valuation& v,
                             const SystemSignature* sig = nullptr) {
    switch (f->kind) {
        case NodeKind::True:
            return f;
        case NodeKind::StateLT:
        case NodeKind::StateGT:
        case NodeKind::CtrlEQ: {
            if (!f->param.is_slot()) return f;
            double c = detail::scalar_for(*f->param.slot, v, sig);
            if (f->kind == NodeKind::StateLT) return state_lt(f->var, c);
            if (f->kind == NodeKind::StateGT) return state_gt(f->var, c);
            return ctrl_eq(f->var, c);
        }
        case NodeKind::Not:
            return not_of(substitute(f->lhs, v, sig));
        case NodeKind::Shift:
            return shifted(f->shift, substitute(f->lhs, v, sig));
        case NodeKind::And:
            return and_of(substitute(f->lhs, v, sig), substitute(f->rhs, v, sig));
        case NodeKind::Or:
            return or_of(substitute(f->lhs, v, sig), substitute(f->rhs, v, sig));
        case NodeKind::Prev:
        case NodeKind::Hist: {
            WindowParam w = f->window.is_slot()
                                ? WindowParam::of(detail::window_for(*f->window.slot, v))
                                : f->window;
            auto sub = substitute(f->lhs, v, sig);
            return f->kind == NodeKind::Prev ? prev(std::move(sub), w) : hist(std::move(sub), w);
        }
        case NodeKind::Since: {
            WindowParam w = f->window.is_slot()
                                ? WindowParam::of(detail::window_for(*f->window.slot, v))
                                : f->window;
            return since(substitute(f->lhs, v, sig), substitute(f->rhs, v, sig), w);
        }
    }
    return f;
}

// ── Canonical keys and structural equality ──────────────────────────────────

namespace detail {

inline std::string window_key(const WindowParam& w) {
    if (w.is_slot()) return "?";
    return std::to_string(w.win.a) + "," + std::to_string(w.win.b);
}

inline std::string param_key(const Param& p) {
    // Slot names are deliberately omitted: two templates that differ only in
    // slot naming enumerate the same candidate set.
    if (p.is_slot()) return "?";
    return fmt_num(p.value);
}

}  // namespace detail

namespace detail {

// shortlex: shorter operand first, ties alphabetically
inline bool shortlex_less(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace detail

// Total order key.  Operands of the commutative connectives are sorted
// (shortlex), so equal keys identify formulas that are syntactically equal
// modulo commutativity of `and`/`or` (and slot renaming).
inline std::string canonical_key(const FormulaPtr& f) {
    switch (f->kind) {
        case NodeKind::True:
            return "T";
        case NodeKind::StateLT:
            return "x" + std::to_string(f->var) + "<" + detail::param_key(f->param);
        case NodeKind::StateGT:
            return "x" + std::to_string(f->var) + ">" + detail::param_key(f->param);
        case NodeKind::CtrlEQ:
            return "u" + std::to_string(f->var) + "=" + detail::param_key(f->param);
        case NodeKind::Not:
            return "(!" + canonical_key(f->lhs) + ")";
        case NodeKind::And:
        case NodeKind::Or: {
            std::string a = canonical_key(f->lhs);
            std::string b = canonical_key(f->rhs);
            if (detail::shortlex_less(b, a)) std::swap(a, b);
            return std::string(f->kind == NodeKind::And ? "(&" : "(|") + a + " " + b + ")";
        }
        case NodeKind::Since:
            return "(S[" + detail::window_key(f->window) + "]" + canonical_key(f->lhs) + " " +
                   canonical_key(f->rhs) + ")";
        case NodeKind::Prev:
            return "(P[" + detail::window_key(f->window) + "]" + canonical_key(f->lhs) + ")";
        case NodeKind::Hist:
            return "(H[" + detail::window_key(f->window) + "]" + canonical_key(f->lhs) + ")";
        case NodeKind::Shift:
            return "(X" + std::to_string(f->shift) + canonical_key(f->lhs) + ")";
    }
    return {};
}

// Exact structural equality, including slot names.
inline bool structural_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind || a->var != b->var || a->shift != b->shift) return false;
    if (a->param.is_slot() != b->param.is_slot()) return false;
    if (a->param.is_slot()) {
        if (a->param.slot->name != b->param.slot->name ||
            a->param.slot->kind != b->param.slot->kind ||
            a->param.slot->index != b->param.slot->index)
            return false;
    } else if (a->param.value != b->param.value) {
        return false;
    }
    if (a->window.is_slot() != b->window.is_slot()) return false;
    if (a->window.is_slot()) {
        if (a->window.slot->name != b->window.slot->name) return false;
    } else if (!(a->window.win == b->window.win)) {
        return false;
    }
    if ((a->lhs == nullptr) != (b->lhs == nullptr)) return false;
    if (a->lhs && !structural_equal(a->lhs, b->lhs)) return false;
    if ((a->rhs == nullptr) != (b->rhs == nullptr)) return false;
    if (a->rhs && !structural_equal(a->rhs, b->rhs)) return false;
    return true;
}

}  // namespace ptstl
