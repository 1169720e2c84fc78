// ============================================================================
// ptstl/miner.hpp — cause-formula synthesis by grid search
// ============================================================================
//
// The miner grows a disjunction Psi = Phi_1 or ... or Phi_p of cause
// formulas Phi = phi_u and phi_xu, where phi_u ranges over pure-control
// templates with l operators and phi_xu over state/control templates with
// r operators, l + r = current operator budget.  Control parts are
// admitted only when controllable, which Theorem-1-style transfer extends
// to the whole conjunction.
//
// Each round enumerates every template pair at the current budget,
// instantiates all grid valuations, and scores the accreted disjunction
// Psi or Phi by F_beta over the dataset.  A round's winner is accepted
// when it improves the running score by at least min_gain; a failed round
// escalates the operator budget once and a failure after escalation
// terminates the search.
//
// Determinism: template enumeration, grid order and the total tie-break
// order (higher score, then smaller operator count, then smaller canonical
// key) are all fixed, so identical inputs give identical results.
// ============================================================================

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ptstl/bitsig.hpp"
#include "ptstl/controllability.hpp"
#include "ptstl/formula.hpp"
#include "ptstl/trace.hpp"

namespace ptstl {

struct ParameterSpace {
    std::vector<std::vector<double>> state_thresholds;  // per state variable, ascending
    std::vector<Window> window_bounds;                  // shared grid for window slots

    // Grids used for the traffic case study.
    static ParameterSpace traffic_default() {
        ParameterSpace p;
        p.state_thresholds = {
            {10, 15, 20, 25, 30}, {10, 15, 20, 25, 30}, {10, 15, 20, 25, 30},
            {5, 10, 15},          {5, 10, 15},
        };
        p.window_bounds = {Window{1, 0}, Window{2, 0}, Window{3, 0}, Window{2, 1}};
        return p;
    }

    void validate(const SystemSignature& sig, bool needs_windows) const {
        if (state_thresholds.size() != sig.n)
            throw ValidationError("parameter space: expected " + std::to_string(sig.n) +
                                  " threshold lists, got " +
                                  std::to_string(state_thresholds.size()));
        for (std::size_t j = 0; j < state_thresholds.size(); ++j)
            if (state_thresholds[j].empty())
                throw ValidationError("parameter space: empty threshold grid for x" +
                                      std::to_string(j));
        if (needs_windows && window_bounds.empty())
            throw ValidationError("parameter space: empty window grid");
        for (const auto& w : window_bounds) make_window(w.a, w.b);
    }
};

struct MiningConfig {
    unsigned total_oc_lo = 0;
    unsigned total_oc_hi = 1;
    std::optional<std::size_t> p_max;  // nullopt: unbounded
    double min_gain = 0.001;
    double beta = 1.0;

    // Only one tie-break policy exists; the id is recorded with results.
    static constexpr const char* kTieBreak = "score,opcount,key";

    void validate() const {
        if (total_oc_lo > total_oc_hi)
            throw ValidationError("mining config: total_oc_lo > total_oc_hi");
        if (min_gain < 0) throw ValidationError("mining config: min_gain must be >= 0");
        if (beta <= 0) throw ValidationError("mining config: beta must be positive");
        if (min_gain == 0 && !p_max)
            throw ValidationError(
                "mining config: min_gain 0 with unbounded p_max does not terminate");
    }
};

struct IterationRecord {
    unsigned current_oc = 0;
    std::size_t candidate_count = 0;
    FormulaPtr chosen;  // null when the round had no candidates
    double score_before = 0.0;
    double score_after = 0.0;
    bool accepted = false;
};

struct CauseDisjunct {
    FormulaPtr formula;       // control_part && mixed_part
    FormulaPtr control_part;  // ground phi_u
    FormulaPtr mixed_part;    // ground phi_xu
    unsigned l = 0;
    unsigned r = 0;
    ControllabilityVerdict verdict;
    double score_after_accept = 0.0;
};

struct MiningResult {
    std::vector<CauseDisjunct> disjuncts;
    std::vector<IterationRecord> iterations;
    double final_score = 0.0;
    std::string diagnostic;

    // Left-associated disjunction in acceptance order; null when empty.
    FormulaPtr psi() const {
        FormulaPtr acc;
        for (const auto& d : disjuncts) acc = acc ? or_of(acc, d.formula) : d.formula;
        return acc;
    }
};

// ── Template enumeration ────────────────────────────────────────────────────

namespace detail {

// Rewrites every slot occurrence to a fresh sequential name (c0, c1, ... for
// scalars; w0, w1, ... for windows).  Enumeration shares subtrees between
// templates, so names are only meaningful after this pass.
inline FormulaPtr freshen_rec(const FormulaPtr& f, unsigned& scalars, unsigned& windows) {
    auto fresh_param = [&](const Param& p, SlotKind kind) {
        if (!p.is_slot()) return p;
        auto slot = std::make_shared<Slot>(
            Slot{"c" + std::to_string(scalars++), kind, p.slot->index});
        return Param::hole(std::move(slot));
    };
    auto fresh_window = [&](const WindowParam& w) {
        if (!w.is_slot()) return w;
        auto slot = std::make_shared<Slot>(
            Slot{"w" + std::to_string(windows++), SlotKind::WindowPair, -1});
        return WindowParam::hole(std::move(slot));
    };
    switch (f->kind) {
        case NodeKind::True:
            return f;
        case NodeKind::StateLT:
            return state_lt(f->var, fresh_param(f->param, SlotKind::StateThreshold));
        case NodeKind::StateGT:
            return state_gt(f->var, fresh_param(f->param, SlotKind::StateThreshold));
        case NodeKind::CtrlEQ:
            return ctrl_eq(f->var, fresh_param(f->param, SlotKind::ControlValue));
        case NodeKind::Not:
            return not_of(freshen_rec(f->lhs, scalars, windows));
        case NodeKind::Shift:
            return shifted(f->shift, freshen_rec(f->lhs, scalars, windows));
        case NodeKind::And:
            return and_of(freshen_rec(f->lhs, scalars, windows),
                          freshen_rec(f->rhs, scalars, windows));
        case NodeKind::Or:
            return or_of(freshen_rec(f->lhs, scalars, windows),
                         freshen_rec(f->rhs, scalars, windows));
        case NodeKind::Prev: {
            auto w = fresh_window(f->window);
            return prev(freshen_rec(f->lhs, scalars, windows), std::move(w));
        }
        case NodeKind::Hist: {
            auto w = fresh_window(f->window);
            return hist(freshen_rec(f->lhs, scalars, windows), std::move(w));
        }
        case NodeKind::Since: {
            auto w = fresh_window(f->window);
            auto a = freshen_rec(f->lhs, scalars, windows);
            auto b = freshen_rec(f->rhs, scalars, windows);
            return since(std::move(a), std::move(b), std::move(w));
        }
    }
    return f;
}

inline FormulaPtr freshen_slots(const FormulaPtr& f) {
    unsigned scalars = 0;
    unsigned windows = 0;
    return freshen_rec(f, scalars, windows);
}

// All templates with exactly `ops` operators from {and, or, S, F^-, G^-}
// over the given atom set.  Negation is excluded: atoms are closed under
// complement once finite control domains are expanded, and enumerating in
// negation-free form matches the cause-template grammar.
inline std::vector<FormulaPtr> enum_templates(unsigned ops,
                                              const std::vector<FormulaPtr>& atoms) {
    std::vector<std::vector<FormulaPtr>> levels(ops + 1);
    levels[0] = atoms;
    auto wslot = [] {
        return WindowParam::hole(
            std::make_shared<Slot>(Slot{"w", SlotKind::WindowPair, -1}));
    };
    for (unsigned k = 1; k <= ops; ++k) {
        std::vector<FormulaPtr> out;
        std::unordered_map<std::string, bool> seen;
        auto push = [&](FormulaPtr f) {
            std::string key = canonical_key(f);
            if (seen.emplace(std::move(key), true).second) out.push_back(std::move(f));
        };
        for (unsigned i = 0; i < k; ++i) {
            const unsigned j = k - 1 - i;
            for (const auto& f : levels[i]) {
                for (const auto& g : levels[j]) {
                    push(and_of(f, g));
                    push(or_of(f, g));
                    push(since(f, g, wslot()));
                }
            }
        }
        for (const auto& f : levels[k - 1]) {
            push(prev(f, wslot()));
            push(hist(f, wslot()));
        }
        levels[k] = std::move(out);
    }
    std::vector<FormulaPtr> result;
    result.reserve(levels[ops].size());
    for (const auto& f : levels[ops]) result.push_back(freshen_slots(f));
    return result;
}

inline std::vector<FormulaPtr> control_atoms(const SystemSignature& sig) {
    std::vector<FormulaPtr> atoms;
    for (std::size_t i = 0; i < sig.m; ++i)
        atoms.push_back(ctrl_eq(static_cast<int>(i),
                                Param::hole(std::make_shared<Slot>(
                                    Slot{"c", SlotKind::ControlValue, static_cast<int>(i)}))));
    return atoms;
}

inline std::vector<FormulaPtr> mixed_atoms(const SystemSignature& sig) {
    std::vector<FormulaPtr> atoms;
    for (std::size_t j = 0; j < sig.n; ++j) {
        auto slot_gt = std::make_shared<Slot>(
            Slot{"c", SlotKind::StateThreshold, static_cast<int>(j)});
        auto slot_lt = std::make_shared<Slot>(
            Slot{"c", SlotKind::StateThreshold, static_cast<int>(j)});
        atoms.push_back(state_gt(static_cast<int>(j), Param::hole(slot_gt)));
        atoms.push_back(state_lt(static_cast<int>(j), Param::hole(slot_lt)));
    }
    for (const auto& a : control_atoms(sig)) atoms.push_back(a);
    return atoms;
}

}  // namespace detail

// All pure-control templates with exactly l operators.
inline std::vector<FormulaPtr> enum_control_templates(unsigned l, const SystemSignature& sig,
                                                      unsigned cap = 2) {
    if (l > cap)
        throw BudgetError("enum_control_templates: operator count " + std::to_string(l) +
                          " exceeds cap " + std::to_string(cap));
    return detail::enum_templates(l, detail::control_atoms(sig));
}

// All templates with exactly r operators over state inequalities and
// control equalities.
inline std::vector<FormulaPtr> enum_mixed_templates(unsigned r, const SystemSignature& sig,
                                                    unsigned cap = 2) {
    if (r > cap)
        throw BudgetError("enum_mixed_templates: operator count " + std::to_string(r) +
                          " exceeds cap " + std::to_string(cap));
    return detail::enum_templates(r, detail::mixed_atoms(sig));
}

// ── Grid valuations ─────────────────────────────────────────────────────────

namespace detail {

// Odometer over a template's slots: scalar slots draw from their variable's
// grid (control slots from the input's domain), window slots from the shared
// window grid.  The last slot cycles fastest.
class GridIterator {
public:
    GridIterator(const FormulaPtr& tpl, const ParameterSpace& space,
                 const SystemSignature& sig) {
        slots_ = collect_slots(tpl);
        for (const auto& s : slots_) {
            switch (s->kind) {
                case SlotKind::ControlValue: {
                    const auto& dom = sig.control_domains.at(static_cast<std::size_t>(s->index));
                    scalar_grids_.push_back(&dom);
                    windows_grids_.push_back(nullptr);
                    break;
                }
                case SlotKind::StateThreshold: {
                    if (static_cast<std::size_t>(s->index) >= space.state_thresholds.size() ||
                        space.state_thresholds[static_cast<std::size_t>(s->index)].empty())
                        throw ValidationError("grid: empty threshold grid for slot '" +
                                              s->name + "' (x" + std::to_string(s->index) + ")");
                    scalar_grids_.push_back(
                        &space.state_thresholds[static_cast<std::size_t>(s->index)]);
                    windows_grids_.push_back(nullptr);
                    break;
                }
                case SlotKind::WindowPair: {
                    if (space.window_bounds.empty())
                        throw ValidationError("grid: empty window grid for slot '" + s->name +
                                              "'");
                    scalar_grids_.push_back(nullptr);
                    windows_grids_.push_back(&space.window_bounds);
                    break;
                }
            }
        }
        digit_.assign(slots_.size(), 0);
        done_ = false;
    }

    bool done() const noexcept { return done_; }

    std::size_t size() const noexcept {
        std::size_t n = 1;
        for (std::size_t i = 0; i < slots_.size(); ++i)
            n *= scalar_grids_[i] ? scalar_grids_[i]->size() : windows_grids_[i]->size();
        return n;
    }

    void fill(Bindings& b) const {
        b.clear();
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            if (scalar_grids_[i])
                b.set(slots_[i].get(), (*scalar_grids_[i])[digit_[i]]);
            else
                b.set(slots_[i].get(), (*windows_grids_[i])[digit_[i]]);
        }
    }

    Valuation valuation() const {
        Valuation v;
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            if (scalar_grids_[i])
                v[slots_[i]->name] = (*scalar_grids_[i])[digit_[i]];
            else
                v[slots_[i]->name] = (*windows_grids_[i])[digit_[i]];
        }
        return v;
    }

    void advance() {
        std::size_t pos = slots_.size();
        while (pos > 0) {
            --pos;
            const std::size_t limit =
                scalar_grids_[pos] ? scalar_grids_[pos]->size() : windows_grids_[pos]->size();
            if (digit_[pos] + 1 < limit) {
                ++digit_[pos];
                return;
            }
            digit_[pos] = 0;
        }
        done_ = true;  // wrapped: all combinations seen
    }

private:
    std::vector<SlotPtr> slots_;
    std::vector<const std::vector<double>*> scalar_grids_;
    std::vector<const std::vector<Window>*> windows_grids_;
    std::vector<std::size_t> digit_;
    bool done_ = true;
};

}  // namespace detail

// A controllable ground instance of a control template.
struct GroundControl {
    FormulaPtr formula;
    ControllabilityVerdict verdict;
};

// One admissible template pair: the control part keeps only its
// controllable grid valuations (uncontrollable ones are dropped here and
// never reach candidate scoring).
struct CauseTemplate {
    FormulaPtr control_part;
    FormulaPtr mixed_part;
    unsigned l = 0;
    unsigned r = 0;
    std::shared_ptr<const std::vector<GroundControl>> controls;
};

namespace detail {

// Enumerates, grounds and controllability-filters the control templates at
// operator count l.  Verdicts are memoised by canonical key.
inline std::vector<std::pair<FormulaPtr, std::shared_ptr<const std::vector<GroundControl>>>>
controllable_controls(unsigned l, const SystemSignature& sig, const ParameterSpace& space,
                      std::unordered_map<std::string, ControllabilityVerdict>& memo,
                      const ControllabilitySearchLimits& limits, unsigned cap) {
    std::vector<std::pair<FormulaPtr, std::shared_ptr<const std::vector<GroundControl>>>> out;
    for (const auto& tpl : enum_control_templates(l, sig, cap)) {
        auto grounds = std::make_shared<std::vector<GroundControl>>();
        for (GridIterator it(tpl, space, sig); !it.done(); it.advance()) {
            FormulaPtr ground = substitute(tpl, it.valuation(), &sig);
            std::string key = canonical_key(ground);
            auto found = memo.find(key);
            if (found == memo.end())
                found = memo.emplace(std::move(key), is_controllable_pure(ground, sig, limits))
                            .first;
            if (found->second.controllable)
                grounds->push_back(GroundControl{std::move(ground), found->second});
        }
        if (!grounds->empty()) out.emplace_back(tpl, std::move(grounds));
    }
    return out;
}

}  // namespace detail

// Template pairs for every split l + r = total_oc, with uncontrollable
// control valuations already removed.  Pairs whose control template has no
// controllable valuation at all are dropped.
inline std::vector<CauseTemplate> enum_cause_templates(
    unsigned total_oc, const SystemSignature& sig, const ParameterSpace& space,
    const ControllabilitySearchLimits& limits = {}, unsigned cap = 2) {
    std::unordered_map<std::string, ControllabilityVerdict> memo;
    std::vector<CauseTemplate> out;
    for (unsigned l = 0; l <= total_oc; ++l) {
        const unsigned r = total_oc - l;
        auto controls = detail::controllable_controls(l, sig, space, memo, limits, cap);
        if (controls.empty()) continue;
        auto mixed = enum_mixed_templates(r, sig, cap);
        for (const auto& [ctpl, grounds] : controls)
            for (const auto& mtpl : mixed)
                out.push_back(CauseTemplate{ctpl, mtpl, l, r, grounds});
    }
    return out;
}

// Streams every ground candidate of one template pair in deterministic grid
// order: control part (controllable valuations only) in the outer loop.
inline void for_each_grid_candidate(
    const CauseTemplate& t, const ParameterSpace& space, const SystemSignature& sig,
    const std::function<void(const FormulaPtr& phi_u, const FormulaPtr& phi_xu)>& visit) {
    for (const auto& gc : *t.controls) {
        for (detail::GridIterator it(t.mixed_part, space, sig); !it.done(); it.advance()) {
            FormulaPtr ground_mixed = substitute(t.mixed_part, it.valuation(), &sig);
            visit(gc.formula, ground_mixed);
        }
    }
}

// Materialised candidate list (control && mixed) of one template pair.
inline std::vector<FormulaPtr> grid_candidates(const CauseTemplate& t,
                                               const ParameterSpace& space,
                                               const SystemSignature& sig) {
    std::vector<FormulaPtr> out;
    for_each_grid_candidate(t, space, sig, [&](const FormulaPtr& u, const FormulaPtr& xu) {
        out.push_back(and_of(u, xu));
    });
    return out;
}

// ── Candidate selection ─────────────────────────────────────────────────────

namespace detail {

// true when (score_b, opc_b, key_b) beats (score_a, opc_a, key_a) under the
// total order: higher score, then smaller operator count, then smaller key.
inline bool candidate_beats(double score_b, unsigned opc_b, const std::string& key_b,
                            double score_a, unsigned opc_a, const std::string& key_a) {
    if (score_b != score_a) return score_b > score_a;
    if (opc_b != opc_a) return opc_b < opc_a;
    return key_b < key_a;
}

}  // namespace detail

// Picks the candidate maximising F_beta of (psi or candidate) over the
// dataset; psi may be null (empty disjunction).  Returns the winner and the
// accreted score.
inline std::pair<FormulaPtr, double> best_candidate(const FormulaPtr& psi,
                                                    const std::vector<FormulaPtr>& candidates,
                                                    const Dataset& ds, double beta) {
    if (candidates.empty()) throw ValidationError("best_candidate: empty candidate stream");
    PackedEvaluator packed(ds);
    PackedEvaluator::Words psi_sig = psi ? packed.eval(*psi) : packed.falses();

    FormulaPtr best;
    double best_score = -1.0;
    unsigned best_opc = 0;
    std::string best_key;
    for (const auto& cand : candidates) {
        PackedEvaluator::Words pred = packed.eval(*cand);
        PackedEvaluator::or_into(pred, psi_sig);
        const double score = f_beta(packed.score(pred), beta);
        const unsigned opc = op_count(cand);
        std::string key = canonical_key(cand);
        if (!best || detail::candidate_beats(score, opc, key, best_score, best_opc, best_key)) {
            best = cand;
            best_score = score;
            best_opc = opc;
            best_key = std::move(key);
        }
    }
    return {best, best_score};
}

// ── Mining loop ─────────────────────────────────────────────────────────────

namespace detail {

struct RoundBest {
    bool found = false;
    double score = -1.0;
    unsigned opc = 0;
    std::string key;
    FormulaPtr control_part;
    FormulaPtr mixed_part;
    ControllabilityVerdict verdict;
    unsigned l = 0;
    unsigned r = 0;
    std::size_t candidates = 0;
};

// Scores every candidate at one operator budget against psi_sig and returns
// the round winner under the total tie-break order.
inline RoundBest run_round(unsigned current_oc, const SystemSignature& sig,
                           const ParameterSpace& space, const MiningConfig& cfg,
                           const PackedEvaluator& packed,
                           const PackedEvaluator::Words& psi_sig,
                           std::unordered_map<std::string, ControllabilityVerdict>& memo,
                           const ControllabilitySearchLimits& limits, unsigned cap) {
    RoundBest best;
    Bindings bindings;
    for (unsigned l = 0; l <= current_oc; ++l) {
        const unsigned r = current_oc - l;
        auto controls = controllable_controls(l, sig, space, memo, limits, cap);
        if (controls.empty()) continue;

        // packed signals of the ground control parts, shared across pairs
        std::vector<std::vector<PackedEvaluator::Words>> control_sigs(controls.size());
        for (std::size_t ci = 0; ci < controls.size(); ++ci)
            for (const auto& gc : *controls[ci].second)
                control_sigs[ci].push_back(packed.eval(*gc.formula));

        auto mixed = enum_mixed_templates(r, sig, cap);
        for (std::size_t ci = 0; ci < controls.size(); ++ci) {
            const auto& grounds = *controls[ci].second;
            for (const auto& mtpl : mixed) {
                const unsigned opc = l + r + 1;
                for (GridIterator it(mtpl, space, sig); !it.done(); it.advance()) {
                    it.fill(bindings);
                    PackedEvaluator::Words mixed_sig = packed.eval(*mtpl, &bindings);
                    for (std::size_t gi = 0; gi < grounds.size(); ++gi) {
                        PackedEvaluator::Words pred = mixed_sig;
                        PackedEvaluator::and_into(pred, control_sigs[ci][gi]);
                        PackedEvaluator::or_into(pred, psi_sig);
                        const double score = f_beta(packed.score(pred), cfg.beta);
                        ++best.candidates;
                        if (best.found && score < best.score) continue;
                        // materialise only to break ties / replace the best
                        FormulaPtr ground_mixed = substitute(mtpl, it.valuation(), &sig);
                        std::string key =
                            canonical_key(and_of(grounds[gi].formula, ground_mixed));
                        if (!best.found ||
                            candidate_beats(score, opc, key, best.score, best.opc, best.key)) {
                            best.found = true;
                            best.score = score;
                            best.opc = opc;
                            best.key = std::move(key);
                            best.control_part = grounds[gi].formula;
                            best.mixed_part = std::move(ground_mixed);
                            best.verdict = grounds[gi].verdict;
                            best.l = l;
                            best.r = r;
                        }
                    }
                }
            }
        }
    }
    return best;
}

}  // namespace detail

// The synthesis loop.  Starts at total_oc_lo; a round that fails to gain
// min_gain escalates the budget when the last success happened at the
// current budget (or at start), and otherwise terminates.  Also stops when
// the budget passes total_oc_hi or Psi reaches p_max disjuncts.
inline MiningResult mine(const Dataset& ds, const ParameterSpace& space,
                         const MiningConfig& cfg,
                         const ControllabilitySearchLimits& limits = {}) {
    cfg.validate();
    if (ds.items.empty()) throw ValidationError("mine: empty dataset");
    space.validate(ds.signature, cfg.total_oc_hi >= 1);

    const SystemSignature& sig = ds.signature;
    const unsigned cap = cfg.total_oc_hi;
    PackedEvaluator packed(ds);
    std::unordered_map<std::string, ControllabilityVerdict> memo;

    MiningResult result;
    PackedEvaluator::Words psi_sig = packed.falses();
    unsigned current_oc = cfg.total_oc_lo;
    unsigned last_successful_oc = cfg.total_oc_lo;
    double last_score = 0.0;

    while (true) {
        if (current_oc > cfg.total_oc_hi) {
            if (result.diagnostic.empty()) result.diagnostic = "operator budget exhausted";
            break;
        }
        if (cfg.p_max && result.disjuncts.size() >= *cfg.p_max) {
            if (result.diagnostic.empty()) result.diagnostic = "reached p_max disjuncts";
            break;
        }

        detail::RoundBest best = detail::run_round(current_oc, sig, space, cfg, packed,
                                                   psi_sig, memo, limits, cap);

        IterationRecord rec;
        rec.current_oc = current_oc;
        rec.candidate_count = best.candidates;
        rec.score_before = last_score;
        rec.score_after = best.found ? best.score : last_score;

        const bool gained = best.found && best.score - last_score >= cfg.min_gain;
        if (gained) {
            rec.accepted = true;
            rec.chosen = and_of(best.control_part, best.mixed_part);
            result.iterations.push_back(rec);

            CauseDisjunct d;
            d.formula = rec.chosen;
            d.control_part = best.control_part;
            d.mixed_part = best.mixed_part;
            d.l = best.l;
            d.r = best.r;
            d.verdict = best.verdict;
            d.score_after_accept = best.score;
            result.disjuncts.push_back(std::move(d));

            PackedEvaluator::Words best_sig = packed.eval(*rec.chosen);
            PackedEvaluator::or_into(psi_sig, best_sig);
            last_score = best.score;
            last_successful_oc = current_oc;
            continue;
        }

        rec.accepted = false;
        if (best.found) rec.chosen = and_of(best.control_part, best.mixed_part);
        result.iterations.push_back(rec);

        if (!best.found && result.iterations.size() == 1)
            result.diagnostic = "no candidates at the initial operator budget";

        if (last_successful_oc != current_oc) {
            if (result.diagnostic.empty())
                result.diagnostic = "no gain after operator budget escalation";
            break;
        }
        ++current_oc;
    }

    if (result.disjuncts.empty() && result.diagnostic.empty())
        result.diagnostic = "no disjunct reached the minimum gain";

    FormulaPtr psi = result.psi();
    result.final_score = psi ? f_beta(confusion(ds, psi), cfg.beta) : 0.0;
    return result;
}

}  // namespace ptstl
