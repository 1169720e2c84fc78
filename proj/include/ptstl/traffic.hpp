// ============================================================================
// ptstl/traffic.hpp — queue-network traffic case study
// ============================================================================
//
// Five roads, two signalised intersections:
//
//     road 0 --> [A] --> road 1 --> [B] --> road 2 --> (exit)
//                 ^                  ^
//               road 3             road 4
//
// Lights u0 (at A) and u1 (at B) take values {0,1}: value 0 lets the
// horizontal (mainline) flow through and blocks the vertical approach,
// value 1 the reverse.  Vehicle counts are integers; roads 0..2 hold up to
// 40 vehicles, side roads 3..4 up to 20.  Each step moves departures first
// (exit, then intersection B, then A, each transfer limited by saturation
// flow and downstream free space), then lets random arrivals enter roads
// 0, 3 and 4, clamped to remaining capacity.
//
// A time point is labelled 1 when the NEXT state breaches 75% occupancy on
// any road (x0,x1,x2 >= 30 or x3,x4 >= 15); the final point is labelled 0.
//
// All randomness flows through a SplitMix64 stream with documented draw
// order, so runs are bit-identical across platforms for a given seed.
// ============================================================================

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ptstl/signature.hpp"
#include "ptstl/trace.hpp"

namespace ptstl {

struct TrafficParams {
    std::array<int, 5> capacities{40, 40, 40, 20, 20};
    int sat_main = 14;  // mainline saturation flow, vehicles/step
    int sat_side = 5;   // side-road saturation flow
    int sat_exit = 14;  // road 2 discharge
    std::array<int, 3> arrival_max{3, 5, 3};  // roads 0, 3, 4 (inclusive upper bounds)
    std::uint64_t seed = 1;

    void validate() const {
        for (int c : capacities)
            if (c < 0) throw ValidationError("traffic: negative capacity");
        if (sat_main < 0 || sat_side < 0 || sat_exit < 0)
            throw ValidationError("traffic: negative saturation flow");
        for (int a : arrival_max)
            if (a < 0) throw ValidationError("traffic: negative arrival bound");
    }
};

struct SimRun {
    Trace trace;
    LabelSeq labels;
    std::uint64_t seed = 0;
    double congestion_rate = 0.0;  // fraction of labelled-1 time points
};

inline SystemSignature traffic_signature(const TrafficParams& p = {}) {
    std::vector<std::pair<double, double>> bounds;
    for (int c : p.capacities) bounds.emplace_back(0.0, static_cast<double>(c));
    return SystemSignature::make(5, 2, {{0, 1}, {0, 1}}, std::move(bounds));
}

namespace detail {

// SplitMix64: tiny, splittable, identical on every platform.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform over 0..n-1 (modulo; bias is negligible for the tiny ranges
    // used here and keeps the stream platform-independent)
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

}  // namespace detail

// One synchronous update.  Departure order: exit, intersection B,
// intersection A; each transfer conserves vehicles.  Arrivals beyond the
// remaining capacity are turned away.
inline std::array<int, 5> step(const std::array<int, 5>& x, const std::array<int, 2>& u,
                               const std::array<int, 3>& w, const TrafficParams& p) {
    for (std::size_t i = 0; i < 5; ++i)
        if (x[i] < 0 || x[i] > p.capacities[i])
            throw ValidationError("traffic step: x" + std::to_string(i) + " out of bounds");
    for (int ui : u)
        if (ui != 0 && ui != 1) throw ValidationError("traffic step: light value not in {0,1}");
    for (std::size_t i = 0; i < 3; ++i)
        if (w[i] < 0 || w[i] > p.arrival_max[i])
            throw ValidationError("traffic step: arrival out of bounds");

    std::array<int, 5> y = x;

    y[2] -= std::min(y[2], p.sat_exit);

    if (u[1] == 0) {
        const int t = std::min({y[1], p.sat_main, p.capacities[2] - y[2]});
        y[1] -= t;
        y[2] += t;
    } else {
        const int t = std::min({y[4], p.sat_side, p.capacities[2] - y[2]});
        y[4] -= t;
        y[2] += t;
    }

    if (u[0] == 0) {
        const int t = std::min({y[0], p.sat_main, p.capacities[1] - y[1]});
        y[0] -= t;
        y[1] += t;
    } else {
        const int t = std::min({y[3], p.sat_side, p.capacities[1] - y[1]});
        y[3] -= t;
        y[1] += t;
    }

    y[0] = std::min(y[0] + w[0], p.capacities[0]);
    y[3] = std::min(y[3] + w[1], p.capacities[3]);
    y[4] = std::min(y[4] + w[2], p.capacities[4]);
    return y;
}

// 1 when the state breaches 75% occupancy on any road.
inline int label_step(const std::array<int, 5>& x_next) {
    const bool ok = x_next[0] < 30 && x_next[1] < 30 && x_next[2] < 30 && x_next[3] < 15 &&
                    x_next[4] < 15;
    return ok ? 0 : 1;
}

// `length` steps, hence length+1 time points.  Draw order per run: initial
// occupancies for roads 0..4, then per step k: u0, u1, then arrivals for
// roads 0, 3, 4 (arrivals are skipped at the final point, which has no
// successor).
inline SimRun simulate(const TrafficParams& p, std::size_t length, std::uint64_t seed) {
    p.validate();
    if (length < 1) throw ValidationError("simulate: length must be >= 1");

    detail::SplitMix64 rng(seed);
    const std::size_t points = length + 1;

    SimRun run;
    run.seed = seed;
    run.trace.states.assign(5, std::vector<double>(points, 0.0));
    run.trace.controls.assign(2, std::vector<double>(points, 0.0));
    run.labels.bits.assign(points, 0);

    std::array<int, 5> x{};
    for (std::size_t i = 0; i < 5; ++i) x[i] = rng.below(p.capacities[i] + 1);

    std::size_t positives = 0;
    for (std::size_t k = 0; k < points; ++k) {
        const std::array<int, 2> u{rng.below(2), rng.below(2)};
        for (std::size_t i = 0; i < 5; ++i) run.trace.states[i][k] = x[i];
        run.trace.controls[0][k] = u[0];
        run.trace.controls[1][k] = u[1];
        if (k == length) break;  // final point: no successor, label stays 0
        const std::array<int, 3> w{rng.below(p.arrival_max[0] + 1),
                                   rng.below(p.arrival_max[1] + 1),
                                   rng.below(p.arrival_max[2] + 1)};
        x = step(x, u, w, p);
        run.labels.bits[k] = static_cast<std::uint8_t>(label_step(x));
        positives += run.labels.bits[k];
    }
    run.congestion_rate = static_cast<double>(positives) / static_cast<double>(points);
    return run;
}

// Fraction of time points whose own state already breaches the occupancy
// bound; logged next to the label-based rate.
inline double state_violation_rate(const Trace& tr) {
    std::size_t bad = 0;
    const std::size_t len = tr.length();
    for (std::size_t k = 0; k < len; ++k) {
        const std::array<int, 5> x{static_cast<int>(tr.states[0][k]),
                                   static_cast<int>(tr.states[1][k]),
                                   static_cast<int>(tr.states[2][k]),
                                   static_cast<int>(tr.states[3][k]),
                                   static_cast<int>(tr.states[4][k])};
        bad += static_cast<std::size_t>(label_step(x));
    }
    return static_cast<double>(bad) / static_cast<double>(len);
}

// Per-run seeds derived from the master seed; exposed so dataset manifests
// can record them.
inline std::vector<std::uint64_t> derive_run_seeds(std::uint64_t master_seed, std::size_t runs) {
    detail::SplitMix64 rng(master_seed);
    std::vector<std::uint64_t> seeds(runs);
    for (auto& s : seeds) s = rng.next();
    return seeds;
}

inline Dataset generate_dataset(const TrafficParams& p, std::size_t runs, std::size_t length,
                                std::uint64_t master_seed) {
    if (runs < 1) throw ValidationError("generate_dataset: runs must be >= 1");
    Dataset ds;
    ds.signature = traffic_signature(p);
    const auto seeds = derive_run_seeds(master_seed, runs);
    for (std::size_t i = 0; i < runs; ++i) {
        SimRun run = simulate(p, length, seeds[i]);
        ds.items.emplace_back(std::move(run.trace), std::move(run.labels));
    }
    return ds;
}

}  // namespace ptstl
