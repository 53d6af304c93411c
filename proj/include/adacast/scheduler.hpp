#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adacast/cascade.hpp"
#include "adacast/constraints.hpp"
#include "adacast/profiles.hpp"

namespace adacast {

struct SchedulerParams {
    int beam_width = 128;
    int max_depth = -1;              ///< -1: as deep as there are SPs (capped at N)
    double max_accuracy_drop = 0.04; ///< balanced-accuracy budget w.r.t. the FB
    int gc_period = 200;             ///< inferences between online-update invocations

    void validate() const;
    int effective_max_depth(const TaskProfiles& profiles) const;
};

/// One beam-search candidate: an SP order and its expected MACs score.
struct CandidateOrder {
    std::vector<PredictorId> sps;
    double expected_macs = 0;
};

/// Per-depth retained candidates. Depth 0 is always the FB-only order.
/// Scores use expected MACs under the validation class distribution;
/// ties break toward the lexicographically smaller id sequence.
std::vector<std::vector<CandidateOrder>> beam_search_candidates(const TaskProfiles& profiles,
                                                                const ValidationStats& stats,
                                                                const SchedulerParams& params);

struct FeasibilityAudit {
    bool feasible = false;
    double accuracy_drop = 0;
    double memory_bytes = 0;
    double worst_case_latency_ms = 0;
    std::vector<std::string> violations;   ///< subset of {"accuracy","memory","latency"}
};

struct SchedulingDecision {
    CascadeConfig config;
    ExpectedCost expected;                 ///< per-inference, T_LC included in latency
    double expected_balanced_accuracy = 0;
    double expected_plain_accuracy = 0;
    FeasibilityAudit audit;
};

/// Evaluates one candidate order against the three deployment checks
/// (accuracy drop, memory, worst-case latency) without filtering.
SchedulingDecision audit_candidate(std::span<const PredictorId> order,
                                   const TaskProfiles& profiles, const ValidationStats& stats,
                                   const NodeConstraints& constraints,
                                   const SchedulerParams& params);

/// Keeps the candidates that pass every check. If none do, falls back to
/// the FB-only configuration when that one is feasible, otherwise throws
/// InfeasibleTaskError carrying the FB-only violation reasons.
std::vector<SchedulingDecision> feasibility_filter(
    const std::vector<std::vector<CandidateOrder>>& candidates, const TaskProfiles& profiles,
    const ValidationStats& stats, const NodeConstraints& constraints,
    const SchedulerParams& params);

/// Beam search + feasibility filter + minimum-expected-MACs selection.
/// Deterministic: ties break toward the lexicographically smaller order.
SchedulingDecision schedule(const TaskProfiles& profiles, const ValidationStats& stats,
                            const NodeConstraints& constraints, const SchedulerParams& params);

struct ParetoPoint {
    double drop_budget = 0;
    std::optional<SchedulingDecision> decision;   ///< empty if infeasible at this budget
    std::vector<std::string> infeasible_reasons;
};

/// Runs schedule() once per drop budget (grid must be sorted ascending).
/// Per-budget infeasibility is recorded in the point, not fatal.
std::vector<ParetoPoint> pareto_sweep(const TaskProfiles& profiles, const ValidationStats& stats,
                                      const NodeConstraints& constraints,
                                      const SchedulerParams& params,
                                      std::span<const double> drop_grid);

/// Snapshot a node sends to the global controller every gc_period
/// inferences. Serializes to the message schema in the README.
struct NodeTelemetry {
    long inference_count = 0;
    std::vector<double> ema;               ///< per-class, entries in [0,1]
    double battery_level = 1.0;
    double temperature_c = 0.0;
    long deadline_misses = 0;
    std::vector<PredictorId> enabled_sps;  ///< current cascade order, enabled only
    std::vector<PredictorId> stored_sps;   ///< everything on local storage
};

/// GC -> node: ship one SP to the node's local store.
struct SpDeployment {
    PredictorId sp;
};

/// Low-frequency GC reaction to telemetry: considers SPs not yet on the
/// node in descending order of their target-class EMA and returns the
/// first whose addition (resorted by EMA) passes the feasibility checks
/// under the EMA as the presumed class distribution and strictly lowers
/// expected MACs. The accuracy re-check uses EMA-weighted plain accuracy
/// against the fallback's, since balanced accuracy is insensitive to the
/// observed distribution.
std::optional<SpDeployment> online_update(const NodeTelemetry& telemetry,
                                          const TaskProfiles& profiles,
                                          const NodeConstraints& constraints,
                                          const SchedulerParams& params);

} // namespace adacast
