#pragma once

#include <span>
#include <string>
#include <vector>

#include "adacast/constraints.hpp"
#include "adacast/profiles.hpp"

namespace adacast {

/// One deployable dynamic-inference configuration: an ordered list of
/// SPs terminated by the fallback, a shared threshold pair, and a
/// per-position enable mask owned by the local controller. The fallback
/// is always last and can never be disabled.
struct CascadeConfig {
    std::vector<PredictorId> ordered_sps;
    std::vector<bool> enabled;       ///< parallel to ordered_sps
    PredictorId fb;
    double thr_minus = 0.1;
    double thr_plus = 0.9;

    int depth() const noexcept { return static_cast<int>(ordered_sps.size()); }

    std::vector<PredictorId> enabled_sps() const {
        std::vector<PredictorId> out;
        for (std::size_t i = 0; i < ordered_sps.size(); ++i)
            if (enabled[i]) out.push_back(ordered_sps[i]);
        return out;
    }

    bool operator==(const CascadeConfig&) const = default;
};

/// Builds a fully-enabled config over `order`, using the task's default
/// thresholds, and validates it.
CascadeConfig make_config(const TaskProfiles& profiles, std::vector<PredictorId> order);
CascadeConfig make_config(const TaskProfiles& profiles, std::vector<PredictorId> order,
                          double thr_minus, double thr_plus);

/// Checks depth <= class count, pairwise-distinct SP targets, threshold
/// ordering and that `fb` names the fallback. Throws ThresholdError or
/// ConfigError.
void validate_config(const CascadeConfig& config, const TaskProfiles& profiles);

/// Pre-drawn randomness for one sample: the confidence each predictor
/// would report plus one uniform variate per predictor for label draws
/// from confusion rows. Indexed parallel to TaskProfiles::predictors().
/// Drawing for every predictor up front keeps a simulation trace
/// identical across configurations that execute different subsets.
struct DrawnSample {
    ClassLabel true_class = 0;
    std::vector<double> confidence;
    std::vector<double> label_u;
};

DrawnSample draw_sample(const TaskProfiles& profiles, ClassLabel true_class, Rng& rng);

/// How executed-model latencies map to wall latency: model latencies are
/// scaled by the node's current contention factor, then the reserved LC
/// budget is added unscaled.
struct LatencyModel {
    double cpu_scale = 1.0;
    double t_lc_ms = 0.0;
};

enum class ExitKind { AcceptAtSp, UndecidedToFb, ExhaustedToFb, FbOnly };

const char* to_string(ExitKind kind);

struct ExitReason {
    ExitKind kind = ExitKind::FbOnly;
    int position = -1;     ///< index within the enabled SP sequence

    bool operator==(const ExitReason&) const = default;
};

/// Per-sample result: predicted label, which models ran, and the exact
/// cost sums over executed models.
struct InferenceOutcome {
    ClassLabel predicted = -1;
    std::vector<PredictorId> executed;
    double macs = 0;
    double latency_ms = 0;
    double energy_mj = 0;
    ExitReason exit;
};

/// Walks the enabled SPs in order: confidence > thr_plus accepts the
/// SP's target and stops; < thr_minus rejects and moves on; anything in
/// [thr_minus, thr_plus] is undecided and invokes the fallback
/// immediately, skipping the remaining SPs. The fallback always returns
/// a label drawn from its confusion row.
InferenceOutcome evaluate(const DrawnSample& sample, const CascadeConfig& config,
                          const TaskProfiles& profiles, const LatencyModel& timing = {});

/// Pre-drawn randomness for one big-little inference.
struct BigLittleSample {
    ClassLabel true_class = 0;
    double little_confidence = 0;   ///< drawn max-probability of the little model
    double little_label_u = 0;
    double big_label_u = 0;
};

BigLittleSample draw_big_little_sample(const PredictorProfile& little, ClassLabel true_class,
                                       Rng& rng);

/// Two-model baseline: the little model always runs; the big model runs
/// iff the little model's drawn max-probability is below tau. Both
/// models must be multiclass-style profiles with confusion rows.
InferenceOutcome big_little_evaluate(const BigLittleSample& sample,
                                     const PredictorProfile& little, const PredictorProfile& big,
                                     double tau, const LatencyModel& timing = {});

/// T_LC + cpu_scale * (sum of enabled SP latencies + FB latency).
double worst_case_latency(const CascadeConfig& config, const NodeConstraints& constraints,
                          const TaskProfiles& profiles, double cpu_scale = 1.0);

struct ExpectedCost {
    double macs = 0;
    double latency_ms = 0;
    double energy_mj = 0;
};

/// Exact expectation of per-inference cost under a class distribution,
/// chaining per-position accept/reject/undecided probabilities. Matches
/// the Monte-Carlo mean of evaluate() under the same timing model.
ExpectedCost expected_cost(const CascadeConfig& config, std::span<const double> dist,
                           const TaskProfiles& profiles, const LatencyModel& timing = {});

struct AccuracyEstimate {
    double balanced = 0;                    ///< unweighted mean of per-class recall
    double plain = 0;                       ///< dist-weighted accuracy
    std::vector<double> per_class_recall;
};

/// Analytic accuracy of a configuration: an SP accept is correct iff the
/// sample's true class equals the SP target; fallback correctness comes
/// from its confusion diagonal.
AccuracyEstimate expected_accuracy(const CascadeConfig& config, std::span<const double> dist,
                                   const TaskProfiles& profiles);

double expected_balanced_accuracy(const CascadeConfig& config, std::span<const double> dist,
                                  const TaskProfiles& profiles);

} // namespace adacast
