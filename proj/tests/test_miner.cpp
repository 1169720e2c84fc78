#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "ptstl/io.hpp"
#include "ptstl/miner.hpp"
#include "ptstl/parser.hpp"
#include "test_support.hpp"

using namespace ptstl;
using ptstl::testing::Rng;

namespace {

const SystemSignature kTraffic = SystemSignature::make(
    5, 2, {{0, 1}, {0, 1}},
    {{0, 40}, {0, 40}, {0, 40}, {0, 20}, {0, 20}});

ParameterSpace small_space() {
    ParameterSpace p;
    p.state_thresholds = {{10, 15}, {10, 15}, {10, 15}, {5, 10}, {5, 10}};
    p.window_bounds = {Window{1, 0}, Window{2, 0}};
    return p;
}

// dataset whose labels are exactly the planted formula's satisfaction signal
Dataset planted_dataset(const FormulaPtr& planted, const SystemSignature& sig, Rng& rng,
                        std::size_t traces, std::size_t len) {
    Dataset ds;
    ds.signature = sig;
    for (std::size_t i = 0; i < traces; ++i) {
        auto tr = testing::random_trace(rng, sig, len);
        LabelSeq labels;
        auto sigl = eval_signal(tr, planted);
        labels.bits.assign(sigl.begin(), sigl.end());
        ds.items.emplace_back(std::move(tr), std::move(labels));
    }
    return ds;
}

bool contains_key(const std::vector<FormulaPtr>& fs, const FormulaPtr& f) {
    const std::string key = canonical_key(f);
    return std::any_of(fs.begin(), fs.end(),
                       [&](const FormulaPtr& g) { return canonical_key(g) == key; });
}

}  // namespace

TEST_CASE("control template enumeration", "[miner]") {
    SECTION("zero operators lists one atom per input") {
        auto ts = enum_control_templates(0, kTraffic);
        REQUIRE(ts.size() == 2);
        CHECK(ts[0]->kind == NodeKind::CtrlEQ);
        CHECK(ts[0]->var == 0);
        CHECK(ts[1]->var == 1);
        CHECK(ts[0]->param.is_slot());
    }
    SECTION("one operator over a single input") {
        auto one = SystemSignature::make(0, 1, {{0, 1}}, {});
        auto ts = enum_control_templates(1, one);
        auto slot = [] {
            return Param::hole(std::make_shared<Slot>(Slot{"c", SlotKind::ControlValue, 0}));
        };
        auto wslot = [] {
            return WindowParam::hole(std::make_shared<Slot>(Slot{"w", SlotKind::WindowPair, -1}));
        };
        CHECK(ts.size() == 5);
        CHECK(contains_key(ts, and_of(ctrl_eq(0, slot()), ctrl_eq(0, slot()))));
        CHECK(contains_key(ts, or_of(ctrl_eq(0, slot()), ctrl_eq(0, slot()))));
        CHECK(contains_key(ts, since(ctrl_eq(0, slot()), ctrl_eq(0, slot()), wslot())));
        CHECK(contains_key(ts, prev(ctrl_eq(0, slot()), wslot())));
        CHECK(contains_key(ts, hist(ctrl_eq(0, slot()), wslot())));
    }
    SECTION("no inputs, no templates") {
        auto none = SystemSignature::make(2, 0, {}, {{0, 1}, {0, 1}});
        CHECK(enum_control_templates(0, none).empty());
    }
    SECTION("cap") {
        CHECK_THROWS_AS(enum_control_templates(3, kTraffic, 2), BudgetError);
    }
}

TEST_CASE("mixed template enumeration", "[miner]") {
    auto ts = enum_mixed_templates(0, kTraffic);
    CHECK(ts.size() == 12);  // 2 inequalities per state variable + 2 control atoms
    auto sgt = [](int j) {
        return state_gt(j, Param::hole(std::make_shared<Slot>(
                               Slot{"c", SlotKind::StateThreshold, j})));
    };
    CHECK(contains_key(ts, sgt(3)));

    auto t1 = enum_mixed_templates(1, kTraffic);
    auto pair41 = and_of(sgt(4), ctrl_eq(1, Param::hole(std::make_shared<Slot>(
                                     Slot{"c", SlotKind::ControlValue, 1}))));
    CHECK(contains_key(t1, pair41));

    SECTION("each template's operator count matches and keys are unique") {
        std::set<std::string> keys;
        for (const auto& t : t1) {
            CHECK(op_count(t) == 1);
            CHECK(keys.insert(canonical_key(t)).second);
        }
    }
    SECTION("slot names are unique within each template") {
        for (const auto& t : t1) CHECK_NOTHROW(collect_slots(t));
    }
}

TEST_CASE("cause template pairs filter uncontrollable control parts", "[miner]") {
    auto space = small_space();
    auto causes = enum_cause_templates(1, kTraffic, space);
    CHECK(!causes.empty());
    for (const auto& ct : causes) {
        CHECK(op_count(ct.control_part) == ct.l);
        CHECK(op_count(ct.mixed_part) == ct.r);
        CHECK(ct.l + ct.r == 1);
        CHECK(classify(ct.control_part) == AtomClass::PureControl);
        for (const auto& gc : *ct.controls) {
            CHECK(gc.verdict.controllable);
            CHECK(is_ground(gc.formula));
            // no domain tautology slipped through
            CHECK(canonical_key(gc.formula) !=
                  canonical_key(or_of(ctrl_eq(0, 0), ctrl_eq(0, 1))));
            CHECK(canonical_key(gc.formula) !=
                  canonical_key(or_of(ctrl_eq(1, 0), ctrl_eq(1, 1))));
        }
    }
}

TEST_CASE("grid candidates are the cartesian product of slot grids", "[miner]") {
    auto space = small_space();

    // (u0 == ?) && (x3 > ?): 2 control values x 2 side thresholds
    auto causes = enum_cause_templates(0, kTraffic, space);
    const CauseTemplate* pair = nullptr;
    for (const auto& ct : causes)
        if (ct.control_part->var == 0 && ct.mixed_part->kind == NodeKind::StateGT &&
            ct.mixed_part->var == 3)
            pair = &ct;
    REQUIRE(pair != nullptr);
    auto cands = grid_candidates(*pair, space, kTraffic);
    CHECK(cands.size() == 4);
    CHECK(contains_key(cands, and_of(ctrl_eq(0, 0), state_gt(3, 10))));

    // a window slot multiplies the count by the window grid size
    const CauseTemplate* win_pair = nullptr;
    auto causes1 = enum_cause_templates(1, kTraffic, space);
    for (const auto& ct : causes1)
        if (ct.l == 0 && ct.mixed_part->kind == NodeKind::Prev &&
            ct.mixed_part->lhs->kind == NodeKind::StateGT && ct.mixed_part->lhs->var == 3 &&
            ct.control_part->var == 0)
            win_pair = &ct;
    REQUIRE(win_pair != nullptr);
    CHECK(grid_candidates(*win_pair, space, kTraffic).size() == 2 * 2 * 2);
}

TEST_CASE("empty grids for referenced slots are rejected", "[miner]") {
    ParameterSpace space = small_space();
    space.state_thresholds[3].clear();
    auto causes = enum_cause_templates(0, kTraffic, small_space());
    const CauseTemplate* pair = nullptr;
    for (const auto& ct : causes)
        if (ct.mixed_part->kind == NodeKind::StateGT && ct.mixed_part->var == 3)
            pair = &ct;
    REQUIRE(pair != nullptr);
    CHECK_THROWS_AS(grid_candidates(*pair, space, kTraffic), ValidationError);
}

TEST_CASE("best candidate maximises the accreted score", "[miner]") {
    Rng rng(11);
    auto sig = SystemSignature::make(1, 1, {{0, 1}}, {{0, 10}});
    auto planted = and_of(ctrl_eq(0, 0), state_gt(0, 5));
    auto ds = planted_dataset(planted, sig, rng, 4, 40);

    SECTION("single candidate returns its own score") {
        auto [best, score] = best_candidate(nullptr, {planted}, ds, 1.0);
        CHECK(structural_equal(best, planted));
        CHECK(score == 1.0);
    }
    SECTION("a dominating candidate wins") {
        auto weak = and_of(ctrl_eq(0, 0), state_gt(0, 9));
        auto [best, score] = best_candidate(nullptr, {weak, planted}, ds, 1.0);
        CHECK(structural_equal(best, planted));
        CHECK(score == 1.0);
    }
    SECTION("ties break towards the smaller operator count") {
        // same satisfaction signal, different syntax
        auto padded = and_of(planted, state_gt(0, 5));
        auto [best, score] = best_candidate(nullptr, {padded, planted}, ds, 1.0);
        CHECK(structural_equal(best, planted));
        CHECK(score == 1.0);
    }
    SECTION("remaining ties break on the canonical key") {
        auto a = and_of(state_gt(0, 5), ctrl_eq(0, 0));
        auto [best, score] = best_candidate(nullptr, {a, planted}, ds, 1.0);
        // identical keys modulo commutativity: the first reported is the
        // canonical representative, whichever operand order arrived
        CHECK(canonical_key(best) == canonical_key(planted));
    }
    SECTION("empty stream is an error") {
        CHECK_THROWS_AS(best_candidate(nullptr, {}, ds, 1.0), ValidationError);
    }
}

TEST_CASE("packed evaluation matches eval_signal", "[miner]") {
    Rng rng(20240817);
    auto sig = testing::toy_signature();
    Dataset ds;
    ds.signature = sig;
    for (int i = 0; i < 4; ++i)
        ds.items.emplace_back(testing::random_trace(rng, sig, 37 + 31 * i),
                              testing::random_labels(rng, 37 + 31 * i));
    PackedEvaluator packed(ds);
    for (int trial = 0; trial < 200; ++trial) {
        auto f = testing::random_formula(rng, sig, {.max_ops = 3, .max_window = 5});
        auto words = packed.eval(*f);
        for (std::size_t t = 0; t < ds.items.size(); ++t)
            REQUIRE(packed.unpack(words, t) == eval_signal(ds.items[t].first, f));
    }
    SECTION("confusion from packed signals matches the public path") {
        for (int trial = 0; trial < 50; ++trial) {
            auto f = testing::random_formula(rng, sig, {.max_ops = 2, .max_window = 4});
            auto c1 = packed.score(packed.eval(*f));
            auto c2 = confusion(ds, f);
            CHECK(c1.tp == c2.tp);
            CHECK(c1.fp == c2.fp);
            CHECK(c1.fn == c2.fn);
            CHECK(c1.tn == c2.tn);
        }
    }
}

TEST_CASE("mining recovers a planted formula exactly", "[miner]") {
    Rng rng(20240818);
    auto sig = SystemSignature::make(2, 1, {{0, 1}}, {{0, 10}, {0, 10}});
    auto planted = and_of(ctrl_eq(0, 0), state_gt(0, 5));
    auto ds = planted_dataset(planted, sig, rng, 6, 50);

    ParameterSpace space;
    space.state_thresholds = {{3, 5, 7}, {3, 5, 7}};
    space.window_bounds = {Window{1, 0}};

    MiningConfig cfg;
    cfg.total_oc_lo = 0;
    cfg.total_oc_hi = 1;
    cfg.p_max = 3;
    cfg.min_gain = 0.01;

    auto res = mine(ds, space, cfg);
    REQUIRE(res.disjuncts.size() == 1);
    CHECK(res.final_score == 1.0);
    auto psi = res.psi();
    for (const auto& [tr, labels] : ds.items) {
        auto sigl = eval_signal(tr, psi);
        for (std::size_t k = 0; k < sigl.size(); ++k)
            REQUIRE(static_cast<bool>(sigl[k]) == static_cast<bool>(labels.bits[k]));
    }
}

TEST_CASE("mining results satisfy their invariants", "[miner]") {
    Rng rng(20240819);
    auto sig = SystemSignature::make(2, 1, {{0, 1}}, {{0, 10}, {0, 10}});
    // noisy labels: planted signal with some random flips
    auto planted = or_of(and_of(ctrl_eq(0, 0), state_gt(0, 5)),
                         and_of(ctrl_eq(0, 1), state_gt(1, 7)));
    Dataset ds = planted_dataset(planted, sig, rng, 5, 60);
    for (auto& [tr, labels] : ds.items)
        for (auto& b : labels.bits)
            if (rng() % 20 == 0) b ^= 1;

    ParameterSpace space;
    space.state_thresholds = {{3, 5, 7}, {3, 5, 7}};
    space.window_bounds = {Window{1, 0}};

    MiningConfig cfg;
    cfg.total_oc_lo = 0;
    cfg.total_oc_hi = 2;
    cfg.p_max = 4;
    cfg.min_gain = 0.005;

    auto res = mine(ds, space, cfg);
    REQUIRE(!res.disjuncts.empty());
    CHECK(res.disjuncts.size() <= 4);

    double last = 0.0;
    for (const auto& it : res.iterations) {
        if (!it.accepted) continue;
        CHECK(it.score_after - it.score_before >= cfg.min_gain);
        CHECK(it.score_after >= last);
        last = it.score_after;
    }
    for (const auto& d : res.disjuncts) {
        CHECK(d.l + d.r >= cfg.total_oc_lo);
        CHECK(d.l + d.r <= cfg.total_oc_hi);
        CHECK(classify(d.control_part) == AtomClass::PureControl);
        auto v = is_controllable_cause(d.control_part, d.mixed_part, sig);
        CHECK(v.controllable);
        CHECK(structural_equal(d.formula, and_of(d.control_part, d.mixed_part)));
    }
    CHECK(res.final_score == f_beta(confusion(ds, res.psi()), cfg.beta));
}

TEST_CASE("mining is deterministic", "[miner]") {
    Rng rng(20240820);
    auto sig = SystemSignature::make(2, 1, {{0, 1}}, {{0, 10}, {0, 10}});
    auto planted = and_of(ctrl_eq(0, 0), state_gt(0, 5));
    auto ds = planted_dataset(planted, sig, rng, 4, 40);
    for (auto& [tr, labels] : ds.items)
        for (auto& b : labels.bits)
            if (rng() % 15 == 0) b ^= 1;

    ParameterSpace space;
    space.state_thresholds = {{3, 5, 7}, {3, 5, 7}};
    space.window_bounds = {Window{1, 0}, Window{2, 1}};

    MiningConfig cfg;
    cfg.total_oc_lo = 0;
    cfg.total_oc_hi = 1;
    cfg.p_max = 3;
    cfg.min_gain = 0.001;

    auto r1 = mine(ds, space, cfg);
    auto r2 = mine(ds, space, cfg);
    auto j1 = render_result_record(r1, cfg, space).dump(2);
    auto j2 = render_result_record(r2, cfg, space).dump(2);
    CHECK(j1 == j2);
}

TEST_CASE("degenerate datasets terminate with an empty disjunction", "[miner]") {
    Rng rng(20240821);
    auto sig = SystemSignature::make(1, 1, {{0, 1}}, {{0, 10}});
    Dataset ds;
    ds.signature = sig;
    for (int i = 0; i < 3; ++i) {
        auto tr = testing::random_trace(rng, sig, 30);
        LabelSeq labels;
        labels.bits.assign(30, 0);  // nothing to explain
        ds.items.emplace_back(std::move(tr), std::move(labels));
    }
    ParameterSpace space;
    space.state_thresholds = {{5}};
    space.window_bounds = {Window{1, 0}};
    MiningConfig cfg;
    cfg.total_oc_lo = 0;
    cfg.total_oc_hi = 1;
    cfg.p_max = 2;
    cfg.min_gain = 0.001;

    auto res = mine(ds, space, cfg);
    CHECK(res.disjuncts.empty());
    CHECK(res.psi() == nullptr);
    CHECK(res.final_score == 0.0);
    CHECK(!res.diagnostic.empty());
}

TEST_CASE("mining config validation", "[miner]") {
    MiningConfig bad;
    bad.total_oc_lo = 2;
    bad.total_oc_hi = 1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    MiningConfig nonterminating;
    nonterminating.min_gain = 0.0;
    nonterminating.p_max.reset();
    CHECK_THROWS_AS(nonterminating.validate(), ValidationError);
    nonterminating.p_max = 3;
    CHECK_NOTHROW(nonterminating.validate());

    MiningConfig neg;
    neg.beta = -1;
    CHECK_THROWS_AS(neg.validate(), ValidationError);
}
