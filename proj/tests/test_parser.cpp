#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "ptstl/parser.hpp"
#include "ptstl/trace.hpp"
#include "test_support.hpp"

using namespace ptstl;
using ptstl::testing::Rng;

namespace {

const SystemSignature kSig = SystemSignature::make(
    5, 2, {{0, 1}, {0, 1}}, std::vector<std::pair<double, double>>(5, {0, 40}));

}  // namespace

TEST_CASE("parsing atoms and connectives", "[parser]") {
    auto f = parse("(u1 == 1) && (x1 > 30)", kSig);
    CHECK(structural_equal(f, and_of(ctrl_eq(1, 1), state_gt(1, 30))));

    CHECK(structural_equal(parse("x3 < 10", kSig), state_lt(3, 10)));
    CHECK(structural_equal(parse("true", kSig), true_const()));
    CHECK(structural_equal(parse("!x0 > 1", kSig), not_of(state_gt(0, 1))));
    CHECK(structural_equal(parse("x0 > 2.5", kSig), state_gt(0, 2.5)));
    CHECK(structural_equal(parse("x0 > -3", kSig), state_gt(0, -3)));
}

TEST_CASE("temporal operators and windows", "[parser]") {
    CHECK(structural_equal(parse("H[2,1] (x1 > 30)", kSig), hist(state_gt(1, 30), 2, 1)));
    CHECK(structural_equal(parse("P[3,0] (u0 == 1)", kSig), prev(ctrl_eq(0, 1), 3, 0)));
    CHECK(structural_equal(parse("X^2 (x0 > 1)", kSig), shifted(2, state_gt(0, 1))));
    CHECK(structural_equal(parse("X (x0 > 1)", kSig), shifted(1, state_gt(0, 1))));
    CHECK(structural_equal(parse("(x0 > 1) S[2,0] (x1 > 2)", kSig),
                           since(state_gt(0, 1), state_gt(1, 2), 2, 0)));

    // H[1,1] p is the one-step shift in disguise
    Rng rng(5);
    auto tr = testing::random_trace(rng, kSig, 12);
    auto a = parse("H[1,1] (x0 > 5)", kSig);
    auto b = parse("X^1 (x0 > 5)", kSig);
    CHECK(eval_signal(tr, a) == eval_signal(tr, b));
}

TEST_CASE("precedence: not > shift > and > or", "[parser]") {
    auto f = parse("! x0 > 1 && x1 > 2 || u0 == 0", kSig);
    CHECK(structural_equal(
        f, or_of(and_of(not_of(state_gt(0, 1)), state_gt(1, 2)), ctrl_eq(0, 0))));
    auto g = parse("X^2 x0 > 1 && x1 > 2", kSig);
    CHECK(structural_equal(g, and_of(shifted(2, state_gt(0, 1)), state_gt(1, 2))));
}

TEST_CASE("parse errors carry spans", "[parser]") {
    auto expect_error = [&](const std::string& text) {
        try {
            parse(text, kSig);
            FAIL("expected ParseError for: " << text);
        } catch (const ParseError& e) {
            CHECK(e.span().start <= e.span().end);
            CHECK(e.span().end <= text.size());
            return e.span();
        }
        return SourceSpan{};
    };

    SECTION("dangling comparison points at end of input") {
        auto span = expect_error("x0 > ");
        CHECK(span.start == 5);
    }
    SECTION("unknown variable index") {
        expect_error("x7 > 1");
        expect_error("u3 == 1");
    }
    SECTION("window with a < b") {
        expect_error("P[0,2] (x0 > 1)");
    }
    SECTION("since is non-associative") {
        expect_error("x0 > 1 S[1,0] x1 > 2 S[1,0] x2 > 3");
    }
    SECTION("control atoms need ==") {
        expect_error("u0 = 1");
        expect_error("u0 > 1");
    }
    SECTION("trailing garbage") {
        expect_error("x0 > 1 )");
    }
}

TEST_CASE("templates parse with slots", "[parser]") {
    auto t = parse("x3 > ?c1", kSig);
    REQUIRE(t->kind == NodeKind::StateGT);
    REQUIRE(t->param.is_slot());
    CHECK(t->param.slot->name == "c1");
    CHECK(t->param.slot->kind == SlotKind::StateThreshold);
    CHECK(t->param.slot->index == 3);
    CHECK(!is_ground(t));

    auto u = parse("u0 == ?v0", kSig);
    CHECK(u->param.slot->kind == SlotKind::ControlValue);

    auto w = parse("P[?w] (x0 > ?c)", kSig);
    REQUIRE(w->window.is_slot());

    // same name with the same meaning is shared; conflicting reuse is not
    auto shared = parse("(x3 > ?c) && (x3 > ?c)", kSig);
    CHECK(collect_slots(shared).size() == 1);
    CHECK_THROWS_AS(parse("(x3 > ?c) && (u0 == ?c)", kSig), ParseError);
}

TEST_CASE("print and parse round trip", "[parser]") {
    CHECK(print(ctrl_eq(0, 0)) == "(u0 == 0)");
    CHECK(print(hist(state_gt(1, 30), 2, 1)) == "(H[2,1] (x1 > 30))");

    Rng rng(20240814);
    auto sig = testing::toy_signature();
    for (int i = 0; i < 500; ++i) {
        auto f = testing::random_formula(rng, sig, {.max_ops = 4, .max_window = 6});
        auto back = parse(print(f), sig);
        REQUIRE(structural_equal(f, back));
    }

    for (const char* t : {"x3 > ?c1", "u0 == ?v0", "P[?w] (x0 > ?c)",
                          "(x0 > ?a) && ((u1 == ?b) S[?w] (x2 < ?d))"}) {
        auto f = parse(t, kSig);
        CHECK(structural_equal(f, parse(print(f), kSig)));
    }
}

TEST_CASE("arbitrary byte input never crashes the parser", "[parser]") {
    Rng rng(777);
    const std::string alphabet = "xu0123456789<>=&|!()[],.?SPHX^ \t-eE";
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const std::size_t len = rng() % 24;
        for (std::size_t j = 0; j < len; ++j) {
            if (rng() % 8 == 0)
                s += static_cast<char>(rng() % 256);
            else
                s += alphabet[rng() % alphabet.size()];
        }
        try {
            auto f = parse(s, kSig);
            CHECK(f != nullptr);
        } catch (const ParseError& e) {
            CHECK(e.span().start <= e.span().end);
            CHECK(e.span().end <= s.size() + 1);
        } catch (const ValidationError&) {
            // window normalisation errors surface as validation failures
        }
    }
}
