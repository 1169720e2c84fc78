// ============================================================================
// ptstl/signature.hpp — static description of the monitored control system
// ============================================================================

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ptstl/errors.hpp"

namespace ptstl {

// Dimensions and value domains of the system under analysis:
//   n state variables x^0..x^{n-1} with per-variable bounds, and
//   m control inputs u^0..u^{m-1}, each ranging over a finite set.
struct SystemSignature {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<std::vector<double>> control_domains;        // size m, sorted, unique
    std::vector<std::pair<double, double>> state_bounds;     // size n, (lo, hi)

    // Normalises domains (sort + dedup) and checks the structural invariants.
    static SystemSignature make(std::size_t n, std::size_t m,
                                std::vector<std::vector<double>> domains,
                                std::vector<std::pair<double, double>> bounds) {
        SystemSignature sig;
        sig.n = n;
        sig.m = m;
        sig.control_domains = std::move(domains);
        sig.state_bounds = std::move(bounds);
        for (auto& dom : sig.control_domains) {
            std::sort(dom.begin(), dom.end());
            dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
        }
        sig.validate();
        return sig;
    }

    void validate() const {
        if (control_domains.size() != m)
            throw ValidationError("signature: expected " + std::to_string(m) +
                                  " control domains, got " +
                                  std::to_string(control_domains.size()));
        for (std::size_t i = 0; i < control_domains.size(); ++i) {
            if (control_domains[i].empty())
                throw ValidationError("signature: control domain " + std::to_string(i) +
                                      " is empty");
        }
        if (state_bounds.size() != n)
            throw ValidationError("signature: expected " + std::to_string(n) +
                                  " state bounds, got " + std::to_string(state_bounds.size()));
        for (std::size_t j = 0; j < state_bounds.size(); ++j) {
            if (state_bounds[j].first > state_bounds[j].second)
                throw ValidationError("signature: state bound " + std::to_string(j) +
                                      " has lo > hi");
        }
    }

    bool control_value_allowed(std::size_t input, double v) const {
        const auto& dom = control_domains.at(input);
        return std::binary_search(dom.begin(), dom.end(), v);
    }
};

}  // namespace ptstl
