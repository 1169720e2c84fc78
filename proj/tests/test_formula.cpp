#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include "ptstl/formula.hpp"
#include "test_support.hpp"

using namespace ptstl;
using ptstl::testing::Rng;

TEST_CASE("operator count follows the counting rules", "[formula]") {
    // os((x1 < 10) and (u0 = 2)) = 1
    CHECK(op_count(and_of(state_lt(1, 10), ctrl_eq(0, 2))) == 1);
    CHECK(op_count(true_const()) == 0);
    // shift is transparent
    CHECK(op_count(shifted(3, ctrl_eq(0, 1))) == 0);
    // os(p S q) = os(p) + os(q) + 1
    CHECK(op_count(since(state_gt(0, 1), ctrl_eq(0, 0), 2, 0)) == 1);
}

TEST_CASE("operator count identities over random formulas", "[formula]") {
    Rng rng(20240811);
    auto sig = testing::toy_signature();
    for (int i = 0; i < 300; ++i) {
        auto a = testing::random_formula(rng, sig);
        auto b = testing::random_formula(rng, sig);
        CHECK(op_count(and_of(a, b)) == op_count(a) + op_count(b) + 1);
        CHECK(op_count(or_of(a, b)) == op_count(a) + op_count(b) + 1);
        CHECK(op_count(since(a, b, 3, 1)) == op_count(a) + op_count(b) + 1);
        CHECK(op_count(not_of(a)) == op_count(a) + 1);
        CHECK(op_count(prev(a, 2, 0)) == op_count(a) + 1);
        CHECK(op_count(hist(a, 2, 0)) == op_count(a) + 1);
        CHECK(op_count(shifted(1 + i % 4, a)) == op_count(a));
    }
}

TEST_CASE("nested shifts merge and X^0 is the identity", "[formula]") {
    auto p = state_gt(0, 5);
    auto f = shifted(2, shifted(3, p));
    REQUIRE(f->kind == NodeKind::Shift);
    CHECK(f->shift == 5);
    CHECK(f->lhs->kind == NodeKind::StateGT);
    CHECK(shifted(0, p).get() == p.get());

    // constructor-level invariant: no shift ever has a shift child
    Rng rng(7);
    auto sig = testing::toy_signature();
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
        if (g->kind == NodeKind::Shift) CHECK(g->lhs->kind != NodeKind::Shift);
        if (g->lhs) walk(g->lhs);
        if (g->rhs) walk(g->rhs);
    };
    for (int i = 0; i < 100; ++i) walk(testing::random_formula(rng, sig));
}

TEST_CASE("classification of atoms", "[formula]") {
    CHECK(classify(ctrl_eq(1, 1)) == AtomClass::PureControl);
    CHECK(classify(and_of(state_gt(3, 10), ctrl_eq(0, 0))) == AtomClass::Mixed);
    CHECK(classify(state_gt(0, 30)) == AtomClass::PureState);
    // no atoms at all: counts as pure-control (nothing mentions the state)
    CHECK(classify(true_const()) == AtomClass::PureControl);
    CHECK(classify(hist(not_of(ctrl_eq(0, 1)), 2, 0)) == AtomClass::PureControl);
}

TEST_CASE("substitution fills slots and validates values", "[formula]") {
    auto sig = SystemSignature::make(5, 2, {{0, 1}, {0, 1}},
                                     std::vector<std::pair<double, double>>(5, {0, 40}));
    auto c0 = std::make_shared<Slot>(Slot{"c0", SlotKind::ControlValue, 0});
    auto tpl = ctrl_eq(0, Param::hole(c0));

    SECTION("control value") {
        auto f = substitute(tpl, {{"c0", 0.0}}, &sig);
        CHECK(structural_equal(f, ctrl_eq(0, 0)));
        CHECK(is_ground(f));
    }
    SECTION("slot-free template is returned unchanged") {
        auto g = and_of(state_gt(3, 10), ctrl_eq(0, 0));
        CHECK(structural_equal(substitute(g, {}), g));
    }
    SECTION("state threshold") {
        auto t = std::make_shared<Slot>(Slot{"c", SlotKind::StateThreshold, 3});
        auto f = substitute(state_gt(3, Param::hole(t)), {{"c", 10.0}});
        CHECK(structural_equal(f, state_gt(3, 10)));
    }
    SECTION("missing assignment") {
        CHECK_THROWS_AS(substitute(tpl, {}), ValidationError);
    }
    SECTION("value outside the control domain") {
        CHECK_THROWS_AS(substitute(tpl, {{"c0", 7.0}}, &sig), ValidationError);
    }
    SECTION("window slot") {
        auto w = std::make_shared<Slot>(Slot{"w", SlotKind::WindowPair, -1});
        auto t = prev(state_gt(0, 5), WindowParam::hole(w));
        auto f = substitute(t, {{"w", Window{2, 1}}});
        REQUIRE(f->kind == NodeKind::Prev);
        CHECK(f->window.win.a == 2);
        CHECK(f->window.win.b == 1);
        CHECK_THROWS_AS(substitute(t, {{"w", 3.0}}), ValidationError);
    }
}

TEST_CASE("canonical keys identify formulas modulo commutativity", "[formula]") {
    auto p = state_gt(0, 5);
    auto q = ctrl_eq(0, 1);
    auto r = state_lt(1, 7);
    CHECK(canonical_key(and_of(p, q)) == canonical_key(and_of(q, p)));
    CHECK(canonical_key(since(p, q, 2, 0)) != canonical_key(since(q, p, 2, 0)));
    CHECK(canonical_key(or_of(p, and_of(q, r))) == canonical_key(or_of(and_of(r, q), p)));
    CHECK(canonical_key(and_of(p, q)) != canonical_key(or_of(p, q)));

    // slot names do not matter, slot positions do
    auto s1 = std::make_shared<Slot>(Slot{"a", SlotKind::StateThreshold, 0});
    auto s2 = std::make_shared<Slot>(Slot{"b", SlotKind::StateThreshold, 0});
    CHECK(canonical_key(state_gt(0, Param::hole(s1))) ==
          canonical_key(state_gt(0, Param::hole(s2))));
}

TEST_CASE("slot collection rejects conflicting reuse", "[formula]") {
    auto a = std::make_shared<Slot>(Slot{"c", SlotKind::StateThreshold, 3});
    auto b = std::make_shared<Slot>(Slot{"c", SlotKind::ControlValue, 0});
    auto ok = and_of(state_gt(3, Param::hole(a)), state_gt(3, Param::hole(a)));
    CHECK(collect_slots(ok).size() == 1);
    auto bad = and_of(state_gt(3, Param::hole(a)), ctrl_eq(0, Param::hole(b)));
    CHECK_THROWS_AS(collect_slots(bad), ValidationError);
}

TEST_CASE("window bounds must satisfy a >= b", "[formula]") {
    CHECK_THROWS_AS(make_window(0, 2), ValidationError);
    CHECK(make_window(2, 0).width() == 3);
    CHECK_THROWS_AS(hist(true_const(), 1, 2), ValidationError);
}

TEST_CASE("structural equality distinguishes values and slots", "[formula]") {
    CHECK(structural_equal(state_gt(0, 5), state_gt(0, 5)));
    CHECK(!structural_equal(state_gt(0, 5), state_gt(0, 6)));
    CHECK(!structural_equal(state_gt(0, 5), state_lt(0, 5)));
    auto s = std::make_shared<Slot>(Slot{"c", SlotKind::StateThreshold, 0});
    CHECK(!structural_equal(state_gt(0, 5), state_gt(0, Param::hole(s))));
}
