#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "adacast/cascade.hpp"
#include "adacast/constraints.hpp"
#include "adacast/profiles.hpp"

namespace adacast {

/// Per-class exponential moving average of predicted labels. One-hot
/// updates keep the values on the probability simplex.
struct EmaState {
    double alpha = 0.01;
    std::vector<double> values;
};

EmaState make_ema(double alpha, std::span<const double> initial_distribution);

/// values[c] <- (1-alpha) * values[c] + alpha * [c == predicted]
void update_ema(EmaState& state, ClassLabel predicted);

/// Local-controller policy knobs.
struct LcPolicy {
    double alpha = 0.01;             ///< EMA smoothing factor
    double tau = 0.05;               ///< class-frequency enable/disable threshold
    double t_lc_ms = 0.02;           ///< actuation budget (mirrors NodeConstraints)
    bool low_battery_mode = false;   ///< aggressively enable stored SPs when battery is low
    double battery_threshold = 0.2;
    int reconcile_period = 20;       ///< periodic reconcile, plus one on every deadline miss
    std::optional<double> tau_enable; ///< optional hysteresis; defaults to tau

    double enable_threshold() const { return tau_enable.value_or(tau); }

    void validate() const {
        if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0,1]");
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("alpha must lie in (0,1]");
        if (reconcile_period < 1)
            throw std::invalid_argument("reconcile_period must be >= 1");
    }
};

/// SPs physically present on the node (deployed at scheduling time or
/// shipped later by the GC). Enabled SPs are always a subset.
struct LocalStore {
    std::set<PredictorId> stored;

    bool contains(const PredictorId& id) const { return stored.count(id) != 0; }
};

enum class LcActionKind { Disable, Enable, Reorder, SafetyShrink };

const char* to_string(LcActionKind kind);

struct LcAction {
    LcActionKind kind;
    PredictorId sp;    ///< empty for Reorder
};

/// Shrinks the enabled set from the back until
/// T_LC + cpu_scale * (sum of enabled SP latencies + FB latency) <= D_t.
/// Returns the adjusted config and the SPs it disabled. Never throws: if
/// even the FB alone does not fit (possible under transient contention),
/// it returns the FB-only config and leaves the miss to the caller's
/// accounting.
std::pair<CascadeConfig, std::vector<PredictorId>> safety_check(const CascadeConfig& config,
                                                                const NodeConstraints& constraints,
                                                                const TaskProfiles& profiles,
                                                                double cpu_scale = 1.0);

/// Scheduling-time guard for the safety_check precondition: the FB alone
/// must satisfy the deadline, otherwise the deployment is a
/// configuration bug. Throws ConstraintUnsatisfiableError.
void require_fallback_fits(const NodeConstraints& constraints, const TaskProfiles& profiles);

struct ReconcileResult {
    CascadeConfig config;
    std::vector<LcAction> actions;
};

/// The three LC actions plus the safety check, applied in order:
///  1. disable enabled SPs whose target-class EMA fell below tau;
///  2. re-enable stored SPs whose target-class EMA exceeds tau (in
///     active low-battery mode, every stored SP);
///  3. sort enabled SPs by EMA descending (ties by id ascending);
///  4. safety_check, so the result always satisfies the latency bound.
/// Disabled-but-stored SPs are kept at the tail of the order so they can
/// be re-enabled later.
ReconcileResult reconcile_enabled(const EmaState& state, const LocalStore& store,
                                  const CascadeConfig& config, const LcPolicy& policy,
                                  const NodeConstraints& constraints,
                                  const TaskProfiles& profiles, double cpu_scale = 1.0,
                                  double battery_level = 1.0);

struct LcStepResult {
    bool reconciled = false;
    std::vector<LcAction> actions;
};

/// Per-inference LC step: updates the EMA with the predicted label, then
/// reconciles when the periodic tick is due or the observed latency
/// missed the deadline. `config` is updated in place.
LcStepResult on_inference(const InferenceOutcome& outcome, EmaState& state,
                          const LocalStore& store, CascadeConfig& config,
                          const NodeConstraints& constraints, const LcPolicy& policy,
                          const TaskProfiles& profiles, long inference_count,
                          double cpu_scale = 1.0, double battery_level = 1.0);

} // namespace adacast
