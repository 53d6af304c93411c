#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adacast/cascade.hpp"
#include "adacast/constraints.hpp"
#include "adacast/local_controller.hpp"
#include "adacast/profiles.hpp"
#include "adacast/scheduler.hpp"

namespace adacast {

/// Workload trace description. Base samples i.i.d. from the test
/// distribution; the mismatch scenarios reweight one class by `factor`
/// before sampling: Minor boosts the class of the last deployed SP,
/// Major boosts a class absent from the deployed order.
struct WorkloadScenario {
    enum class Kind { Base, MismatchMinor, MismatchMajor, CustomTrace };

    Kind kind = Kind::Base;
    std::string name = "base";
    double factor = 5.0;
    ClassLabel target_class = -1;           ///< MismatchMajor only
    std::filesystem::path trace_path;       ///< CustomTrace only
    std::vector<double> distribution;       ///< empty: use validation distribution
    int length = 510;                       ///< samples per repetition
    int repetitions = 3;
    std::uint64_t seed = 1;
    bool grow_length = false;               ///< grow the trace instead of reweighting
    /// contention profile: (record index, cpu_scale) pairs, ascending
    std::vector<std::pair<long, double>> resource_schedule;

    void validate() const;
};

WorkloadScenario load_scenario(const std::filesystem::path& path);
WorkloadScenario parse_scenario(const std::string& json_text);

/// Resolves `kind` against the scenario-adjusted distribution and draws
/// `length` labels i.i.d. (ScenarioError if Major names a deployed class
/// or Minor runs against an empty order). Deterministic given the seed.
std::vector<ClassLabel> generate_trace(std::span<const double> test_distribution,
                                       const WorkloadScenario& scenario,
                                       std::span<const PredictorId> deployed_order,
                                       const TaskProfiles& profiles);

/// Returns the scenario-adjusted class distribution (before sampling).
std::vector<double> scenario_distribution(std::span<const double> test_distribution,
                                          const WorkloadScenario& scenario,
                                          std::span<const PredictorId> deployed_order,
                                          const TaskProfiles& profiles);

enum class AdaptationMode { Static, Dynamic, Ours };

const char* to_string(AdaptationMode mode);

/// Mutable node-side state advanced by the simulation loop. cpu_scale
/// models contention as a multiplicative latency factor; battery drains
/// by per-inference energy against the declared capacity.
struct NodeSimState {
    double cpu_scale = 1.0;
    double battery_level = 1.0;
    long clock = 0;   ///< inference index
};

struct SimOptions {
    AdaptationMode mode = AdaptationMode::Ours;
    bool gc_enabled = true;
    long gc_delay = 0;                ///< delivery delay per direction, in inferences
    bool threaded_gc = false;         ///< run online updates on a worker thread
    double battery_capacity_mj = 1e6;
    /// (record index, cpu_scale) pairs; scale persists once applied.
    /// Empty: fall back to the scenario's resource_schedule.
    std::vector<std::pair<long, double>> resource_schedule;
};

struct StepRecord {
    long index = 0;                   ///< 0-based record index
    ClassLabel true_class = 0;
    InferenceOutcome outcome;
    bool deadline_miss = false;
    double cpu_scale = 1.0;
    double battery = 1.0;
    std::vector<PredictorId> order;   ///< config snapshot after the LC step
    std::vector<bool> enabled;
    std::vector<double> ema;          ///< empty when no LC runs
};

struct SimEvent {
    long inference = 0;               ///< 1-based inference count
    std::string source;               ///< "LC" or "GC"
    std::string action;               ///< DISABLE/ENABLE/REORDER/SAFETY_SHRINK/TELEMETRY/DEPLOY
    PredictorId sp;
    std::string detail;
    std::vector<double> ema;
};

struct RunSummary {
    long inferences = 0;
    double mean_latency_ms = 0;
    double p50_latency_ms = 0;
    double p95_latency_ms = 0;
    double p99_latency_ms = 0;
    double mean_energy_mj = 0;
    double mean_macs = 0;
    double balanced_accuracy = 0;
    double plain_accuracy = 0;
    long deadline_misses = 0;
    double final_battery = 1.0;
    long lc_actions = 0;
    long gc_deployments = 0;
};

struct SimulationRun {
    std::vector<StepRecord> records;
    std::vector<SimEvent> events;
    RunSummary summary;
};

RunSummary summarize(const std::vector<StepRecord>& records, const std::vector<SimEvent>& events,
                     int num_classes);

/// Closed-loop simulation of one node plus the GC over a workload trace.
/// Static runs the fallback alone, Dynamic freezes the scheduled config,
/// Ours enables both controllers. Fully deterministic given the scenario
/// seed; the threaded GC mode produces identical output.
SimulationRun run_simulation(const TaskProfiles& profiles, const SchedulingDecision& decision,
                             const WorkloadScenario& scenario, const NodeConstraints& constraints,
                             const LcPolicy& lc_policy, const SchedulerParams& sched_params,
                             const SimOptions& options);

struct ComparisonRow {
    std::string scenario;
    AdaptationMode mode = AdaptationMode::Static;
    RunSummary summary;
};

/// Runs the same trace under every requested mode (same seed, same
/// drawn confidences) and tabulates the summaries.
std::vector<ComparisonRow> run_comparison(const TaskProfiles& profiles,
                                          const SchedulingDecision& decision,
                                          const WorkloadScenario& scenario,
                                          const NodeConstraints& constraints,
                                          const LcPolicy& lc_policy,
                                          const SchedulerParams& sched_params,
                                          const SimOptions& options,
                                          std::span<const AdaptationMode> modes);

} // namespace adacast
