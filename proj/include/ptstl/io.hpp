// ============================================================================
// ptstl/io.hpp — dataset files, result records, run configuration
// ============================================================================
//
// On-disk dataset layout: one directory holding manifest.json plus one CSV
// per trace.  CSV schema (strict):
//
//   t,x0,...,x{n-1},u0,...,u{m-1},label
//
// with integer-or-decimal cells and newline-terminated rows.  The manifest
// records the system signature, the per-trace file list with seeds and
// lengths, and aggregate label statistics.  read_dataset rejects anything
// write_dataset could not have produced: wrong header, wrong row count,
// stray columns, labels outside {0,1}, control values outside the declared
// domain (reported with row and column), unknown manifest keys.
//
// Mining results serialise twice: a machine-readable JSON record with a
// fixed key order (byte-identical for identical inputs) and a human
// report.  Formula text in both uses the parser grammar, so records can be
// fed back to `eval` and `check`.
// ============================================================================

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptstl/formula.hpp"
#include "ptstl/miner.hpp"
#include "ptstl/parser.hpp"
#include "ptstl/traffic.hpp"
#include "ptstl/trace.hpp"

namespace ptstl {

using json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const auto& a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
    }
}

inline std::string trace_file_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%03zu.csv", index);
    return buf;
}

inline std::string csv_header(const SystemSignature& sig) {
    std::string h = "t";
    for (std::size_t j = 0; j < sig.n; ++j) h += ",x" + std::to_string(j);
    for (std::size_t i = 0; i < sig.m; ++i) h += ",u" + std::to_string(i);
    h += ",label";
    return h;
}

inline double parse_cell(const std::string& cell, const std::string& file, std::size_t row,
                         std::size_t col) {
    if (cell.empty())
        throw ValidationError(file + ": empty cell at row " + std::to_string(row) +
                              ", column " + std::to_string(col));
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size())
        throw ValidationError(file + ": malformed number '" + cell + "' at row " +
                              std::to_string(row) + ", column " + std::to_string(col));
    return v;
}

}  // namespace detail

// ── Dataset files ───────────────────────────────────────────────────────────

inline std::string render_trace_csv(const Trace& tr, const LabelSeq& labels,
                                    const SystemSignature& sig) {
    std::string out = detail::csv_header(sig) + "\n";
    const std::size_t len = tr.length();
    for (std::size_t k = 0; k < len; ++k) {
        out += std::to_string(k);
        for (std::size_t j = 0; j < sig.n; ++j) out += "," + detail::fmt_num(tr.states[j][k]);
        for (std::size_t i = 0; i < sig.m; ++i) out += "," + detail::fmt_num(tr.controls[i][k]);
        out += "," + std::to_string(static_cast<int>(labels.bits[k]));
        out += "\n";
    }
    return out;
}

inline json render_manifest(const Dataset& ds, const std::vector<std::uint64_t>& seeds) {
    json sig_j;
    sig_j["n"] = ds.signature.n;
    sig_j["m"] = ds.signature.m;
    sig_j["control_domains"] = ds.signature.control_domains;
    json bounds = json::array();
    for (const auto& [lo, hi] : ds.signature.state_bounds) bounds.push_back({lo, hi});
    sig_j["state_bounds"] = bounds;

    json traces = json::array();
    std::size_t total = 0;
    std::size_t positive = 0;
    for (std::size_t t = 0; t < ds.items.size(); ++t) {
        const auto& [tr, labels] = ds.items[t];
        std::size_t pos = 0;
        for (auto b : labels.bits) pos += b;
        json tj;
        tj["file"] = detail::trace_file_name(t);
        tj["seed"] = t < seeds.size() ? seeds[t] : 0;
        tj["points"] = tr.length();
        tj["positive_labels"] = pos;
        traces.push_back(std::move(tj));
        total += tr.length();
        positive += pos;
    }

    json m;
    m["format_version"] = 1;
    m["signature"] = std::move(sig_j);
    m["traces"] = std::move(traces);
    json stats;
    stats["total_points"] = total;
    stats["positive"] = positive;
    stats["rate"] = total ? static_cast<double>(positive) / static_cast<double>(total) : 0.0;
    m["label_stats"] = std::move(stats);
    return m;
}

inline void write_dataset(const std::filesystem::path& dir, const Dataset& ds,
                          const std::vector<std::uint64_t>& seeds = {}) {
    ds.validate();
    std::filesystem::create_directories(dir);
    for (std::size_t t = 0; t < ds.items.size(); ++t) {
        std::ofstream f(dir / detail::trace_file_name(t), std::ios::binary);
        if (!f) throw ValidationError("write_dataset: cannot open trace file for writing");
        f << render_trace_csv(ds.items[t].first, ds.items[t].second, ds.signature);
    }
    std::ofstream mf(dir / "manifest.json", std::ios::binary);
    if (!mf) throw ValidationError("write_dataset: cannot open manifest for writing");
    mf << render_manifest(ds, seeds).dump(2) << "\n";
}

namespace detail {

inline std::pair<Trace, LabelSeq> parse_trace_csv(const std::string& text,
                                                  const SystemSignature& sig,
                                                  std::size_t expected_points,
                                                  const std::string& file) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(file + ": empty trace file");
    if (line != csv_header(sig))
        throw ValidationError(file + ": header mismatch; expected '" + csv_header(sig) + "'");

    Trace tr;
    tr.states.assign(sig.n, {});
    tr.controls.assign(sig.m, {});
    LabelSeq labels;

    const std::size_t want_cols = 1 + sig.n + sig.m + 1;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        ++row;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (cells.size() != want_cols)
            throw ValidationError(file + ": row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " columns, expected " +
                                  std::to_string(want_cols));
        const double t = parse_cell(cells[0], file, row, 0);
        if (t != static_cast<double>(row - 1))
            throw ValidationError(file + ": row " + std::to_string(row) +
                                  " has time index " + cells[0] + ", expected " +
                                  std::to_string(row - 1));
        std::size_t col = 1;
        for (std::size_t j = 0; j < sig.n; ++j, ++col)
            tr.states[j].push_back(parse_cell(cells[col], file, row, col));
        for (std::size_t i = 0; i < sig.m; ++i, ++col) {
            const double v = parse_cell(cells[col], file, row, col);
            if (!sig.control_value_allowed(i, v))
                throw ValidationError(file + ": control value " + fmt_num(v) +
                                      " outside declared domain at row " + std::to_string(row) +
                                      ", column " + std::to_string(col) + " (u" +
                                      std::to_string(i) + ")");
            tr.controls[i].push_back(v);
        }
        const double lab = parse_cell(cells[col], file, row, col);
        if (lab != 0.0 && lab != 1.0)
            throw ValidationError(file + ": label not in {0,1} at row " + std::to_string(row) +
                                  ", column " + std::to_string(col));
        labels.bits.push_back(static_cast<std::uint8_t>(lab));
    }
    if (row != expected_points)
        throw ValidationError(file + ": has " + std::to_string(row) +
                              " rows, manifest declares " + std::to_string(expected_points));
    return {std::move(tr), std::move(labels)};
}

}  // namespace detail

inline Dataset read_dataset(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json", std::ios::binary);
    if (!mf) throw ValidationError("read_dataset: missing manifest.json in " + dir.string());
    json m;
    try {
        mf >> m;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("read_dataset: malformed manifest: ") + e.what());
    }

    detail::reject_unknown_keys(m, {"format_version", "signature", "traces", "label_stats"},
                                "manifest");
    if (!m.contains("format_version") || m["format_version"] != 1)
        throw ValidationError("manifest: unsupported or missing format_version");
    if (!m.contains("signature") || !m.contains("traces"))
        throw ValidationError("manifest: missing signature or traces");

    const json& s = m["signature"];
    detail::reject_unknown_keys(s, {"n", "m", "control_domains", "state_bounds"},
                                "manifest signature");
    std::vector<std::vector<double>> domains =
        s.at("control_domains").get<std::vector<std::vector<double>>>();
    std::vector<std::pair<double, double>> bounds;
    for (const auto& b : s.at("state_bounds")) {
        if (!b.is_array() || b.size() != 2)
            throw ValidationError("manifest: state bound must be a [lo, hi] pair");
        bounds.emplace_back(b[0].get<double>(), b[1].get<double>());
    }
    SystemSignature sig = SystemSignature::make(s.at("n").get<std::size_t>(),
                                                s.at("m").get<std::size_t>(),
                                                std::move(domains), std::move(bounds));

    Dataset ds;
    ds.signature = sig;
    for (const auto& tj : m["traces"]) {
        detail::reject_unknown_keys(tj, {"file", "seed", "points", "positive_labels"},
                                    "manifest trace entry");
        const std::string file = tj.at("file").get<std::string>();
        const std::size_t points = tj.at("points").get<std::size_t>();
        std::ifstream tf(dir / file, std::ios::binary);
        if (!tf) throw ValidationError("read_dataset: listed trace file missing: " + file);
        std::stringstream buf;
        buf << tf.rdbuf();
        ds.items.push_back(detail::parse_trace_csv(buf.str(), sig, points, file));
    }
    ds.validate();
    return ds;
}

// ── Mining results ──────────────────────────────────────────────────────────

inline json render_result_record(const MiningResult& res, const MiningConfig& cfg,
                                 const ParameterSpace& space) {
    json c;
    c["total_oc_lo"] = cfg.total_oc_lo;
    c["total_oc_hi"] = cfg.total_oc_hi;
    if (cfg.p_max)
        c["p_max"] = *cfg.p_max;
    else
        c["p_max"] = nullptr;
    c["min_gain"] = cfg.min_gain;
    c["beta"] = cfg.beta;
    c["tie_break"] = MiningConfig::kTieBreak;
    json ps;
    ps["state_thresholds"] = space.state_thresholds;
    json wins = json::array();
    for (const auto& w : space.window_bounds) wins.push_back({w.a, w.b});
    ps["window_bounds"] = wins;
    c["parameter_space"] = std::move(ps);

    json disjuncts = json::array();
    for (const auto& d : res.disjuncts) {
        json dj;
        dj["formula"] = print(d.formula);
        dj["control_part"] = print(d.control_part);
        dj["mixed_part"] = print(d.mixed_part);
        dj["l"] = d.l;
        dj["r"] = d.r;
        dj["score_after_accept"] = d.score_after_accept;
        json witness = json::array();
        if (d.verdict.witness)
            for (const auto& lag : d.verdict.witness->values) witness.push_back(lag);
        dj["witness"] = std::move(witness);
        dj["witness_search_size"] = d.verdict.search_size;
        disjuncts.push_back(std::move(dj));
    }

    json iterations = json::array();
    for (const auto& it : res.iterations) {
        json ij;
        ij["oc"] = it.current_oc;
        ij["candidates"] = it.candidate_count;
        if (it.chosen)
            ij["chosen"] = print(it.chosen);
        else
            ij["chosen"] = nullptr;
        ij["score_before"] = it.score_before;
        ij["score_after"] = it.score_after;
        ij["accepted"] = it.accepted;
        iterations.push_back(std::move(ij));
    }

    json r;
    r["format_version"] = 1;
    r["config"] = std::move(c);
    r["final_score"] = res.final_score;
    FormulaPtr psi = res.psi();
    if (psi)
        r["psi"] = print(psi);
    else
        r["psi"] = nullptr;
    r["disjuncts"] = std::move(disjuncts);
    r["iterations"] = std::move(iterations);
    r["diagnostic"] = res.diagnostic;
    return r;
}

inline std::string render_result_report(const MiningResult& res, const MiningConfig& cfg) {
    std::ostringstream out;
    out << "mining report\n";
    out << "  operator budget: [" << cfg.total_oc_lo << ", " << cfg.total_oc_hi << "]";
    if (cfg.p_max)
        out << ", p_max " << *cfg.p_max;
    else
        out << ", p_max unbounded";
    out << ", min_gain " << detail::fmt_num(cfg.min_gain) << ", beta "
        << detail::fmt_num(cfg.beta) << "\n";
    for (std::size_t i = 0; i < res.iterations.size(); ++i) {
        const auto& it = res.iterations[i];
        out << "  round " << i + 1 << ": oc=" << it.current_oc << " candidates="
            << it.candidate_count;
        if (it.chosen) {
            out << " best=" << print(it.chosen) << " score " << detail::fmt_num(it.score_before)
                << " -> " << detail::fmt_num(it.score_after)
                << (it.accepted ? " [accepted]" : " [rejected]");
        } else {
            out << " (no candidates)";
        }
        out << "\n";
    }
    FormulaPtr psi = res.psi();
    out << "  psi: " << (psi ? print(psi) : "(empty)") << "\n";
    out << "  final score: " << detail::fmt_num(res.final_score) << "\n";
    for (std::size_t i = 0; i < res.disjuncts.size(); ++i) {
        const auto& d = res.disjuncts[i];
        out << "  disjunct " << i + 1 << ": " << print(d.formula) << " [l=" << d.l
            << ", r=" << d.r << "] witness";
        if (d.verdict.witness) {
            for (std::size_t lag = 0; lag < d.verdict.witness->values.size(); ++lag)
                for (std::size_t in = 0; in < d.verdict.witness->values[lag].size(); ++in)
                    out << " u" << in << "@-" << lag << "="
                        << detail::fmt_num(d.verdict.witness->values[lag][in]);
        }
        out << "\n";
    }
    if (!res.diagnostic.empty()) out << "  note: " << res.diagnostic << "\n";
    return out.str();
}

// ── Run configuration ───────────────────────────────────────────────────────

struct RunConfig {
    std::optional<ParameterSpace> space;
    MiningConfig mining;
    TrafficParams traffic;
    std::string dataset_dir;
    std::string output_prefix = "result";
};

inline RunConfig parse_run_config(const json& j) {
    RunConfig rc;
    detail::reject_unknown_keys(
        j, {"parameter_space", "mining", "traffic", "dataset_dir", "output_prefix"},
        "run config");

    if (j.contains("parameter_space")) {
        const json& ps = j["parameter_space"];
        detail::reject_unknown_keys(ps, {"state_thresholds", "window_bounds"},
                                    "parameter_space");
        ParameterSpace space;
        if (ps.contains("state_thresholds"))
            space.state_thresholds =
                ps["state_thresholds"].get<std::vector<std::vector<double>>>();
        if (ps.contains("window_bounds")) {
            for (const auto& w : ps["window_bounds"]) {
                if (!w.is_array() || w.size() != 2)
                    throw ValidationError("parameter_space: window bound must be [a, b]");
                space.window_bounds.push_back(
                    make_window(w[0].get<unsigned>(), w[1].get<unsigned>()));
            }
        }
        rc.space = std::move(space);
    }

    if (j.contains("mining")) {
        const json& mg = j["mining"];
        detail::reject_unknown_keys(
            mg, {"total_oc_lo", "total_oc_hi", "p_max", "min_gain", "beta"}, "mining config");
        if (mg.contains("total_oc_lo")) rc.mining.total_oc_lo = mg["total_oc_lo"].get<unsigned>();
        if (mg.contains("total_oc_hi")) rc.mining.total_oc_hi = mg["total_oc_hi"].get<unsigned>();
        if (mg.contains("p_max")) {
            if (mg["p_max"].is_null())
                rc.mining.p_max.reset();
            else
                rc.mining.p_max = mg["p_max"].get<std::size_t>();
        }
        if (mg.contains("min_gain")) rc.mining.min_gain = mg["min_gain"].get<double>();
        if (mg.contains("beta")) rc.mining.beta = mg["beta"].get<double>();
    }

    if (j.contains("traffic")) {
        const json& tf = j["traffic"];
        detail::reject_unknown_keys(
            tf, {"capacities", "sat_main", "sat_side", "sat_exit", "arrival_max", "seed"},
            "traffic config");
        if (tf.contains("capacities")) {
            auto caps = tf["capacities"].get<std::vector<int>>();
            if (caps.size() != 5)
                throw ValidationError("traffic config: capacities must list 5 roads");
            std::copy(caps.begin(), caps.end(), rc.traffic.capacities.begin());
        }
        if (tf.contains("sat_main")) rc.traffic.sat_main = tf["sat_main"].get<int>();
        if (tf.contains("sat_side")) rc.traffic.sat_side = tf["sat_side"].get<int>();
        if (tf.contains("sat_exit")) rc.traffic.sat_exit = tf["sat_exit"].get<int>();
        if (tf.contains("arrival_max")) {
            auto arr = tf["arrival_max"].get<std::vector<int>>();
            if (arr.size() != 3)
                throw ValidationError("traffic config: arrival_max must list 3 entry roads");
            std::copy(arr.begin(), arr.end(), rc.traffic.arrival_max.begin());
        }
        if (tf.contains("seed")) rc.traffic.seed = tf["seed"].get<std::uint64_t>();
    }

    if (j.contains("dataset_dir")) rc.dataset_dir = j["dataset_dir"].get<std::string>();
    if (j.contains("output_prefix")) rc.output_prefix = j["output_prefix"].get<std::string>();

    rc.mining.validate();
    rc.traffic.validate();
    return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open config file " + path.string());
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("malformed config JSON: ") + e.what());
    }
    return parse_run_config(j);
}

}  // namespace ptstl
