// ============================================================================
// ptstl command-line tool
// ============================================================================
//
// Subcommands:
//   simulate  generate a labelled traffic dataset (explicit --seed required)
//   mine      synthesize a controllable cause formula from a dataset
//   eval      score a formula against a dataset (confusion + F_beta)
//   check     controllability verdict and witness for a formula
//   rewrite   X-normal form and CNF clauses of a formula
//
// Results go to stdout, diagnostics to stderr.  Exit codes: 0 success,
// 1 usage error, 2 data/validation error, 3 search or rewrite budget
// exceeded.
// ============================================================================

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ptstl/controllability.hpp"
#include "ptstl/io.hpp"
#include "ptstl/miner.hpp"
#include "ptstl/parser.hpp"
#include "ptstl/rewrite.hpp"
#include "ptstl/traffic.hpp"

namespace {

using namespace ptstl;

FormulaPtr parse_ground(const std::string& text, const SystemSignature& sig) {
    FormulaPtr f = parse(text, sig);
    if (!is_ground(f))
        throw ValidationError("formula contains parameter slots; supply concrete values");
    return f;
}

SystemSignature signature_for(const std::string& dataset_dir) {
    if (dataset_dir.empty()) return traffic_signature();
    return read_dataset(dataset_dir).signature;
}

int cmd_simulate(const TrafficParams& params, std::size_t runs, std::size_t length,
                 std::uint64_t seed, const std::string& out_dir) {
    TrafficParams p = params;
    p.seed = seed;
    Dataset ds = generate_dataset(p, runs, length, seed);
    const auto seeds = derive_run_seeds(seed, runs);

    std::size_t positives = 0;
    std::size_t state_bad = 0;
    std::size_t total = 0;
    for (const auto& [tr, labels] : ds.items) {
        for (auto b : labels.bits) positives += b;
        state_bad += static_cast<std::size_t>(state_violation_rate(tr) *
                                              static_cast<double>(tr.length()) + 0.5);
        total += tr.length();
    }
    write_dataset(out_dir, ds, seeds);

    std::printf("runs=%zu length=%zu points=%zu\n", runs, length, total);
    std::printf("label_rate=%s\n",
                detail::fmt_num(static_cast<double>(positives) / static_cast<double>(total))
                    .c_str());
    std::printf("state_violation_rate=%s\n",
                detail::fmt_num(static_cast<double>(state_bad) / static_cast<double>(total))
                    .c_str());
    std::fprintf(stderr, "dataset written to %s\n", out_dir.c_str());
    return 0;
}

int cmd_mine(const std::string& dataset_dir, const RunConfig& rc, const std::string& out_prefix) {
    Dataset ds = read_dataset(dataset_dir);
    ParameterSpace space;
    if (rc.space) {
        space = *rc.space;
    } else if (ds.signature.n == 5 && ds.signature.m == 2) {
        space = ParameterSpace::traffic_default();
    } else {
        throw ValidationError(
            "dataset is not the 5-road traffic system; provide parameter_space in the config");
    }

    MiningResult res = mine(ds, space, rc.mining);

    const std::string record = render_result_record(res, rc.mining, space).dump(2) + "\n";
    const std::string report = render_result_report(res, rc.mining);
    {
        std::ofstream rf(out_prefix + ".json", std::ios::binary);
        if (!rf) throw ValidationError("cannot write " + out_prefix + ".json");
        rf << record;
    }
    {
        std::ofstream tf(out_prefix + ".txt", std::ios::binary);
        if (!tf) throw ValidationError("cannot write " + out_prefix + ".txt");
        tf << report;
    }
    std::cout << report;
    std::fprintf(stderr, "record written to %s.json, report to %s.txt\n", out_prefix.c_str(),
                 out_prefix.c_str());
    return 0;
}

int cmd_eval(const std::string& dataset_dir, const std::string& formula_text, double beta) {
    Dataset ds = read_dataset(dataset_dir);
    FormulaPtr f = parse_ground(formula_text, ds.signature);
    Confusion c = confusion(ds, f);
    std::printf("formula: %s\n", print(f).c_str());
    std::printf("tp=%llu fp=%llu fn=%llu tn=%llu\n", (unsigned long long)c.tp,
                (unsigned long long)c.fp, (unsigned long long)c.fn, (unsigned long long)c.tn);
    const double prec = c.tp + c.fp ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    const double rec = c.tp + c.fn ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    std::printf("precision=%s recall=%s\n", detail::fmt_num(prec).c_str(),
                detail::fmt_num(rec).c_str());
    std::printf("f_beta(beta=%s)=%s\n", detail::fmt_num(beta).c_str(),
                detail::fmt_num(f_beta(c, beta)).c_str());
    return 0;
}

int cmd_check(const std::string& dataset_dir, const std::string& formula_text,
              std::uint64_t max_assignments) {
    SystemSignature sig = signature_for(dataset_dir);
    FormulaPtr f = parse_ground(formula_text, sig);

    FormulaPtr phi_u = f;
    if (classify(f) != AtomClass::PureControl && f->kind == NodeKind::And &&
        classify(f->lhs) == AtomClass::PureControl) {
        // cause shape: verdict transfers from the control part
        phi_u = f->lhs;
        std::printf("cause shape detected; checking control part %s\n", print(phi_u).c_str());
    }
    ControllabilitySearchLimits limits;
    limits.max_assignments = max_assignments;
    ControllabilityVerdict v = phi_u.get() == f.get()
                                   ? is_controllable_pure(f, sig, limits)
                                   : is_controllable_cause(phi_u, f->rhs, sig, limits);

    std::printf("controllable: %s\n", v.controllable ? "yes" : "no");
    if (v.witness) {
        for (std::size_t lag = 0; lag < v.witness->values.size(); ++lag) {
            std::printf("witness lag %zu:", lag);
            for (std::size_t i = 0; i < v.witness->values[lag].size(); ++i)
                std::printf(" u%zu=%s", i, detail::fmt_num(v.witness->values[lag][i]).c_str());
            std::printf("\n");
        }
    }
    std::printf("assignments examined: %llu\n", (unsigned long long)v.search_size);
    return 0;
}

int cmd_rewrite(const std::string& dataset_dir, const std::string& formula_text,
                std::size_t node_budget) {
    SystemSignature sig = signature_for(dataset_dir);
    FormulaPtr f = parse_ground(formula_text, sig);
    RewriteLimits limits{node_budget};
    FormulaPtr xnf = to_x_normal_form(f, limits);
    FormulaPtr nnf = push_negations(xnf, limits);
    auto clauses = to_cnf(nnf, limits);
    std::printf("xnf: %s\n", print(xnf).c_str());
    std::printf("nnf: %s\n", print(nnf).c_str());
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        std::printf("clause %zu%s:", i, clauses[i].pure_control ? " (pure-control)" : "");
        std::printf(" %s\n", print(clauses[i].to_formula()).c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"controllable ptSTL cause-formula mining"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a labelled traffic dataset");
    TrafficParams params;
    std::size_t runs = 20;
    std::size_t length = 100;
    std::uint64_t seed = 0;
    std::string out_dir = "dataset";
    sim->add_option("--runs", runs, "number of simulation runs");
    sim->add_option("--length", length, "steps per run");
    sim->add_option("--seed", seed, "master RNG seed")->required();
    sim->add_option("--out", out_dir, "output dataset directory");
    sim->add_option("--sat-main", params.sat_main, "mainline saturation flow");
    sim->add_option("--sat-side", params.sat_side, "side-road saturation flow");
    sim->add_option("--sat-exit", params.sat_exit, "exit discharge");
    std::vector<int> arrivals;
    sim->add_option("--arrivals", arrivals, "arrival bounds for roads 0,3,4 (three values)");

    // mine
    auto* mine_cmd = app.add_subcommand("mine", "mine a cause formula from a dataset");
    std::string dataset_dir;
    std::string config_path;
    std::string out_prefix;
    std::optional<unsigned> oc_lo, oc_hi;
    std::optional<std::int64_t> p_max_flag;
    std::optional<double> min_gain_flag, beta_flag;
    mine_cmd->add_option("--dataset", dataset_dir, "dataset directory")->required();
    mine_cmd->add_option("--config", config_path, "run-config JSON file");
    mine_cmd->add_option("--out", out_prefix, "output prefix for .json/.txt results");
    mine_cmd->add_option("--oc-lo", oc_lo, "lower total operator count");
    mine_cmd->add_option("--oc-hi", oc_hi, "upper total operator count");
    mine_cmd->add_option("--p-max", p_max_flag, "max disjuncts (-1 for unbounded)");
    mine_cmd->add_option("--min-gain", min_gain_flag, "minimum score gain per disjunct");
    mine_cmd->add_option("--beta", beta_flag, "F_beta weight used for candidate scoring");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "confusion counts and F_beta for a formula");
    std::string eval_formula;
    double eval_beta = 1.0;
    std::string eval_dataset;
    eval_cmd->add_option("formula", eval_formula, "formula text")->required();
    eval_cmd->add_option("--dataset", eval_dataset, "dataset directory")->required();
    eval_cmd->add_option("--beta", eval_beta, "F_beta weight");

    // check
    auto* check_cmd = app.add_subcommand("check", "controllability verdict and witness");
    std::string check_formula;
    std::string check_dataset;
    std::uint64_t max_assignments = std::uint64_t{1} << 20;
    check_cmd->add_option("formula", check_formula, "formula text")->required();
    check_cmd->add_option("--dataset", check_dataset,
                          "dataset directory supplying the signature (default: traffic)");
    check_cmd->add_option("--max-assignments", max_assignments, "search-space cap");

    // rewrite
    auto* rw_cmd = app.add_subcommand("rewrite", "X-normal form and CNF of a formula");
    std::string rw_formula;
    std::string rw_dataset;
    std::size_t node_budget = RewriteLimits{}.max_nodes;
    rw_cmd->add_option("formula", rw_formula, "formula text")->required();
    rw_cmd->add_option("--dataset", rw_dataset,
                       "dataset directory supplying the signature (default: traffic)");
    rw_cmd->add_option("--node-budget", node_budget, "rewrite node budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*sim) {
            if (!arrivals.empty()) {
                if (arrivals.size() != 3)
                    throw ValidationError("--arrivals expects exactly three values");
                params.arrival_max = {arrivals[0], arrivals[1], arrivals[2]};
            }
            return cmd_simulate(params, runs, length, seed, out_dir);
        }
        if (*mine_cmd) {
            RunConfig rc;
            if (!config_path.empty()) rc = load_run_config(config_path);
            if (oc_lo) rc.mining.total_oc_lo = *oc_lo;
            if (oc_hi) rc.mining.total_oc_hi = *oc_hi;
            if (p_max_flag)
                rc.mining.p_max = *p_max_flag < 0
                                      ? std::nullopt
                                      : std::optional<std::size_t>(
                                            static_cast<std::size_t>(*p_max_flag));
            if (min_gain_flag) rc.mining.min_gain = *min_gain_flag;
            if (beta_flag) rc.mining.beta = *beta_flag;
            rc.mining.validate();
            std::string prefix = !out_prefix.empty() ? out_prefix : rc.output_prefix;
            return cmd_mine(dataset_dir, rc, prefix);
        }
        if (*eval_cmd) return cmd_eval(eval_dataset, eval_formula, eval_beta);
        if (*check_cmd) return cmd_check(check_dataset, check_formula, max_assignments);
        if (*rw_cmd) return cmd_rewrite(rw_dataset, rw_formula, node_budget);
    } catch (const BudgetError& e) {
        std::fprintf(stderr, "budget error: %s\n", e.what());
        return 3;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
