#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "ptstl/controllability.hpp"
#include "test_support.hpp"

using namespace ptstl;
using ptstl::testing::Rng;

namespace {

const SystemSignature kTwoBinary = SystemSignature::make(
    2, 2, {{0, 1}, {0, 1}}, {{0, 40}, {0, 40}});

const SystemSignature kOneBinary = SystemSignature::make(1, 1, {{0, 1}}, {{0, 40}});

// Independent oracle: evaluates a pure-control formula against an explicit
// lag table (values[d][i] = input i at d steps before the evaluation
// instant); lags beyond the table are before time zero and evaluate false.
bool oracle_eval(const Formula& f, const std::vector<std::vector<double>>& lags,
                 std::size_t depth) {
    if (depth >= lags.size()) return false;
    switch (f.kind) {
        case NodeKind::True:
            return true;
        case NodeKind::CtrlEQ:
            return lags[depth][static_cast<std::size_t>(f.var)] == f.param.value;
        case NodeKind::StateLT:
        case NodeKind::StateGT:
            FAIL("state atom in pure-control oracle");
            return false;
        case NodeKind::Not:
            return !oracle_eval(*f.lhs, lags, depth);
        case NodeKind::And:
            return oracle_eval(*f.lhs, lags, depth) && oracle_eval(*f.rhs, lags, depth);
        case NodeKind::Or:
            return oracle_eval(*f.lhs, lags, depth) || oracle_eval(*f.rhs, lags, depth);
        case NodeKind::Shift:
            return oracle_eval(*f.lhs, lags, depth + f.shift);
        case NodeKind::Prev: {
            for (unsigned t = f.window.win.b; t <= f.window.win.a; ++t)
                if (oracle_eval(*f.lhs, lags, depth + t)) return true;
            return false;
        }
        case NodeKind::Hist: {
            for (unsigned t = f.window.win.b; t <= f.window.win.a; ++t)
                if (!oracle_eval(*f.lhs, lags, depth + t)) return false;
            return true;
        }
        case NodeKind::Since: {
            for (unsigned t = f.window.win.b; t <= f.window.win.a; ++t) {
                if (!oracle_eval(*f.rhs, lags, depth + t)) continue;
                bool all = true;
                for (unsigned s = f.window.win.b; s <= t; ++s)
                    if (!oracle_eval(*f.lhs, lags, depth + s)) {
                        all = false;
                        break;
                    }
                if (all) return true;
            }
            return false;
        }
    }
    return false;
}

// brute force over every lag table of the given depth
bool oracle_controllable(const FormulaPtr& f, const SystemSignature& sig, std::size_t lags) {
    std::vector<std::size_t> digit(lags * sig.m, 0);
    while (true) {
        std::vector<std::vector<double>> table(lags, std::vector<double>(sig.m));
        for (std::size_t d = 0; d < lags; ++d)
            for (std::size_t i = 0; i < sig.m; ++i)
                table[d][i] = sig.control_domains[i][digit[d * sig.m + i]];
        if (!oracle_eval(*f, table, 0)) return true;
        std::size_t pos = digit.size();
        while (pos > 0) {
            --pos;
            if (digit[pos] + 1 < sig.control_domains[pos % sig.m].size()) {
                ++digit[pos];
                break;
            }
            digit[pos] = 0;
            if (pos == 0) return false;
        }
    }
}

Trace witness_trace(const ControlAssignment& asg, const SystemSignature& sig, Rng& rng) {
    const std::size_t points = asg.values.size();
    Trace tr;
    tr.states.assign(sig.n, std::vector<double>(points, 0.0));
    for (std::size_t j = 0; j < sig.n; ++j)
        for (std::size_t k = 0; k < points; ++k)
            tr.states[j][k] = static_cast<double>(rng() % 41);
    tr.controls.assign(sig.m, std::vector<double>(points, 0.0));
    for (std::size_t d = 0; d < points; ++d)
        for (std::size_t i = 0; i < sig.m; ++i)
            tr.controls[i][points - 1 - d] = asg.values[d][i];
    return tr;
}

}  // namespace

TEST_CASE("single control equality is controllable", "[controllability]") {
    auto v = is_controllable_pure(ctrl_eq(1, 1), kTwoBinary);
    CHECK(v.controllable);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->values.size() == 1);
    CHECK(v.witness->values[0][1] == 0);  // u1 <- 0 falsifies
    CHECK(v.search_size == 1);            // first assignment in lexicographic order
}

TEST_CASE("domain tautologies are not controllable", "[controllability]") {
    auto v = is_controllable_pure(or_of(ctrl_eq(0, 0), ctrl_eq(0, 1)), kTwoBinary);
    CHECK(!v.controllable);
    CHECK(!v.witness.has_value());
    CHECK(v.search_size == 4);  // exhausted both inputs' assignments
}

TEST_CASE("temporal control formulas search over lags", "[controllability]") {
    auto v = is_controllable_pure(hist(ctrl_eq(0, 0), 1, 0), kOneBinary);
    CHECK(v.controllable);
    REQUIRE(v.witness.has_value());
    REQUIRE(v.witness->values.size() == 2);
    // lexicographically first falsifier: lag0 = 0, lag1 = 1
    CHECK(v.witness->values[0][0] == 0);
    CHECK(v.witness->values[1][0] == 1);
    CHECK(v.search_size == 2);
}

TEST_CASE("cause conjunctions inherit the control part's verdict", "[controllability]") {
    SECTION("worked example") {
        auto v = is_controllable_cause(ctrl_eq(1, 1), state_gt(1, 30), kTwoBinary);
        CHECK(v.controllable);
        CHECK(v.witness->values[0][1] == 0);
    }
    SECTION("tautological control part") {
        auto v = is_controllable_cause(or_of(ctrl_eq(0, 0), ctrl_eq(0, 1)),
                                       state_gt(0, 10), kTwoBinary);
        CHECK(!v.controllable);
    }
    SECTION("duplicated control atom in the other conjunct") {
        auto v = is_controllable_cause(ctrl_eq(0, 0),
                                       and_of(state_gt(1, 10), ctrl_eq(0, 0)), kTwoBinary);
        CHECK(v.controllable);
        CHECK(v.witness->values[0][0] == 1);
    }
}

TEST_CASE("contract violations and budgets", "[controllability]") {
    CHECK_THROWS_AS(is_controllable_pure(state_gt(0, 1), kTwoBinary), ValidationError);
    CHECK_THROWS_AS(is_controllable_pure(and_of(ctrl_eq(0, 0), state_gt(0, 1)), kTwoBinary),
                    ValidationError);

    ControllabilitySearchLimits tiny;
    tiny.max_assignments = 2;
    CHECK_THROWS_AS(is_controllable_pure(hist(ctrl_eq(0, 0), 3, 0), kOneBinary, tiny),
                    BudgetError);
}

TEST_CASE("negated control atoms expand over the finite domain", "[controllability]") {
    auto bin = SystemSignature::make(0, 1, {{0, 1}}, {});
    auto tern = SystemSignature::make(0, 1, {{0, 1, 2}}, {});

    CHECK(structural_equal(expand_ctrl_negation(not_of(ctrl_eq(0, 0)), bin), ctrl_eq(0, 1)));
    CHECK(structural_equal(expand_ctrl_negation(not_of(ctrl_eq(0, 0)), tern),
                           or_of(ctrl_eq(0, 1), ctrl_eq(0, 2))));
    auto untouched = and_of(ctrl_eq(0, 0), hist(ctrl_eq(0, 1), 2, 0));
    CHECK(structural_equal(expand_ctrl_negation(untouched, bin), untouched));
    // expansion preserves evaluation on conforming traces
    Rng rng(31);
    auto sig3 = SystemSignature::make(1, 1, {{0, 1, 2}}, {{0, 10}});
    for (int i = 0; i < 50; ++i) {
        auto tr = testing::random_trace(rng, sig3, 10);
        auto f = not_of(ctrl_eq(0, static_cast<double>(rng() % 3)));
        auto inner = shifted(1, f);
        CHECK(eval_signal(tr, inner) ==
              eval_signal(tr, expand_ctrl_negation(inner, sig3)));
    }
}

TEST_CASE("verdicts agree with the brute-force oracle", "[controllability]") {
    Rng rng(20240815);
    testing::GenOptions opt;
    opt.max_ops = 2;
    opt.max_window = 3;
    opt.max_shift = 2;
    opt.pure_control = true;
    opt.allow_not = true;
    int checked = 0;
    for (int i = 0; i < 250; ++i) {
        auto f = testing::random_formula(rng, kTwoBinary, opt);
        const unsigned h = horizon(f);
        if (h > 4) continue;
        auto v = is_controllable_pure(f, kTwoBinary);
        CHECK(v.controllable == oracle_controllable(f, kTwoBinary, h + 1));
        ++checked;
        if (v.controllable) {
            // witness soundness on the synthetic trace and with random states
            auto tr = witness_trace(*v.witness, kTwoBinary, rng);
            CHECK(!eval_at(tr, f, h));
        }
    }
    CHECK(checked > 150);
}

TEST_CASE("verdicts ignore state values", "[controllability]") {
    Rng rng(606);
    testing::GenOptions opt;
    opt.max_ops = 2;
    opt.max_window = 2;
    opt.pure_control = true;
    for (int i = 0; i < 60; ++i) {
        auto f = testing::random_formula(rng, kTwoBinary, opt);
        auto v = is_controllable_pure(f, kTwoBinary);
        if (!v.controllable) continue;
        const unsigned h = horizon(f);
        auto t1 = witness_trace(*v.witness, kTwoBinary, rng);
        auto t2 = witness_trace(*v.witness, kTwoBinary, rng);
        CHECK(eval_at(t1, f, h) == eval_at(t2, f, h));
    }
}

TEST_CASE("witnesses falsify the whole cause on arbitrary states", "[controllability]") {
    Rng rng(20240816);
    testing::GenOptions ctrl_opt;
    ctrl_opt.max_ops = 1;
    ctrl_opt.max_window = 2;
    ctrl_opt.pure_control = true;
    testing::GenOptions mixed_opt;
    mixed_opt.max_ops = 2;
    mixed_opt.max_window = 3;

    int done = 0;
    while (done < 100) {
        auto phi_u = testing::random_formula(rng, kTwoBinary, ctrl_opt);
        auto v = is_controllable_pure(phi_u, kTwoBinary);
        if (!v.controllable) continue;
        auto phi_xu = testing::random_formula(rng, kTwoBinary, mixed_opt);
        auto cause = and_of(phi_u, phi_xu);
        auto tr = witness_trace(*v.witness, kTwoBinary, rng);
        REQUIRE(!eval_at(tr, cause, horizon(phi_u)));
        ++done;
    }
}
