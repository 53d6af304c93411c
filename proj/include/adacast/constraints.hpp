#pragma once

#include <stdexcept>

namespace adacast {

/// Per-node deployment constraints: memory budget, the task's
/// per-inference deadline D_t and the reserved local-controller
/// actuation budget T_LC.
struct NodeConstraints {
    double memory_budget_bytes = 0;
    double deadline_ms = 0;
    double t_lc_ms = 0;

    void validate() const {
        if (!(memory_budget_bytes > 0))
            throw std::invalid_argument("memory_budget_bytes must be positive");
        if (!(deadline_ms > 0)) throw std::invalid_argument("deadline_ms must be positive");
        if (!(t_lc_ms >= 0)) throw std::invalid_argument("t_lc_ms must be non-negative");
        if (!(t_lc_ms < deadline_ms))
            throw std::invalid_argument("t_lc_ms must be smaller than deadline_ms");
    }
};

} // namespace adacast
