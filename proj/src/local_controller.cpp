#include "adacast/local_controller.hpp"

#include <algorithm>

namespace adacast {

EmaState make_ema(double alpha, std::span<const double> initial_distribution) {
    EmaState s;
    s.alpha = alpha;
    s.values.assign(initial_distribution.begin(), initial_distribution.end());
    return s;
}

void update_ema(EmaState& state, ClassLabel predicted) {
    for (std::size_t c = 0; c < state.values.size(); ++c) {
        state.values[c] *= (1.0 - state.alpha);
        if (static_cast<ClassLabel>(c) == predicted) state.values[c] += state.alpha;
    }
}

const char* to_string(LcActionKind kind) {
    switch (kind) {
    case LcActionKind::Disable: return "DISABLE";
    case LcActionKind::Enable: return "ENABLE";
    case LcActionKind::Reorder: return "REORDER";
    case LcActionKind::SafetyShrink: return "SAFETY_SHRINK";
    }
    return "?";
}

std::pair<CascadeConfig, std::vector<PredictorId>> safety_check(const CascadeConfig& config,
                                                                const NodeConstraints& constraints,
                                                                const TaskProfiles& profiles,
                                                                double cpu_scale) {
    CascadeConfig adjusted = config;
    std::vector<PredictorId> dropped;
    while (worst_case_latency(adjusted, constraints, profiles, cpu_scale) >
           constraints.deadline_ms) {
        int last_enabled = -1;
        for (int i = adjusted.depth() - 1; i >= 0; --i) {
            if (adjusted.enabled[static_cast<std::size_t>(i)]) {
                last_enabled = i;
                break;
            }
        }
        if (last_enabled < 0) break;   // FB alone; nothing left to shed
        adjusted.enabled[static_cast<std::size_t>(last_enabled)] = false;
        dropped.push_back(adjusted.ordered_sps[static_cast<std::size_t>(last_enabled)]);
    }
    return {std::move(adjusted), std::move(dropped)};
}

void require_fallback_fits(const NodeConstraints& constraints, const TaskProfiles& profiles) {
    const double fb_only = constraints.t_lc_ms + profiles.fallback().latency_ms;
    if (fb_only > constraints.deadline_ms)
        throw ConstraintUnsatisfiableError(
            "fallback alone exceeds the deadline: T_LC + T(FB) = " + std::to_string(fb_only) +
            " ms > D_t = " + std::to_string(constraints.deadline_ms) + " ms");
}

ReconcileResult reconcile_enabled(const EmaState& state, const LocalStore& store,
                                  const CascadeConfig& config, const LcPolicy& policy,
                                  const NodeConstraints& constraints,
                                  const TaskProfiles& profiles, double cpu_scale,
                                  double battery_level) {
    policy.validate();
    const bool low_battery = policy.low_battery_mode && battery_level < policy.battery_threshold;
    const auto previously_enabled = config.enabled_sps();
    const auto was_enabled = [&](const PredictorId& id) {
        return std::find(previously_enabled.begin(), previously_enabled.end(), id) !=
               previously_enabled.end();
    };
    const auto ema_of = [&](const PredictorId& id) {
        return state.values[static_cast<std::size_t>(profiles.by_id(id).target)];
    };

    std::vector<PredictorId> enabled, disabled;
    for (const auto& id : store.stored) {
        bool keep;
        if (low_battery)
            keep = true;
        else if (was_enabled(id))
            keep = !(ema_of(id) < policy.tau);
        else
            keep = ema_of(id) > policy.enable_threshold();
        (keep ? enabled : disabled).push_back(id);
    }
    const auto by_ema_desc = [&](const PredictorId& a, const PredictorId& b) {
        if (ema_of(a) != ema_of(b)) return ema_of(a) > ema_of(b);
        return a < b;
    };
    std::sort(enabled.begin(), enabled.end(), by_ema_desc);
    std::sort(disabled.begin(), disabled.end(), by_ema_desc);

    CascadeConfig next;
    next.fb = config.fb;
    next.thr_minus = config.thr_minus;
    next.thr_plus = config.thr_plus;
    next.ordered_sps = enabled;
    next.ordered_sps.insert(next.ordered_sps.end(), disabled.begin(), disabled.end());
    next.enabled.assign(next.ordered_sps.size(), false);
    for (std::size_t i = 0; i < enabled.size(); ++i) next.enabled[i] = true;

    auto [safe, shrunk] = safety_check(next, constraints, profiles, cpu_scale);

    ReconcileResult result;
    result.config = std::move(safe);
    const auto finally_enabled = result.config.enabled_sps();
    const auto is_final = [&](const PredictorId& id) {
        return std::find(finally_enabled.begin(), finally_enabled.end(), id) !=
               finally_enabled.end();
    };
    for (const auto& id : previously_enabled) {
        if (is_final(id)) continue;
        const bool by_safety =
            std::find(shrunk.begin(), shrunk.end(), id) != shrunk.end();
        result.actions.push_back(
            {by_safety ? LcActionKind::SafetyShrink : LcActionKind::Disable, id});
    }
    for (const auto& id : finally_enabled)
        if (!was_enabled(id)) result.actions.push_back({LcActionKind::Enable, id});

    // reorder event: surviving SPs changed relative order
    std::vector<PredictorId> survivors_before, survivors_after;
    for (const auto& id : previously_enabled)
        if (is_final(id)) survivors_before.push_back(id);
    for (const auto& id : finally_enabled)
        if (was_enabled(id)) survivors_after.push_back(id);
    if (survivors_before != survivors_after)
        result.actions.push_back({LcActionKind::Reorder, {}});

    return result;
}

LcStepResult on_inference(const InferenceOutcome& outcome, EmaState& state,
                          const LocalStore& store, CascadeConfig& config,
                          const NodeConstraints& constraints, const LcPolicy& policy,
                          const TaskProfiles& profiles, long inference_count,
                          double cpu_scale, double battery_level) {
    update_ema(state, outcome.predicted);
    LcStepResult step;
    const bool missed = outcome.latency_ms > constraints.deadline_ms;
    const bool periodic = inference_count % policy.reconcile_period == 0;
    if (missed || periodic) {
        auto reconciled = reconcile_enabled(state, store, config, policy, constraints, profiles,
                                            cpu_scale, battery_level);
        config = std::move(reconciled.config);
        step.actions = std::move(reconciled.actions);
        step.reconciled = true;
    }
    return step;
}

} // namespace adacast
