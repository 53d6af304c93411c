#include "adacast/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace adacast {

namespace {

constexpr double kTol = 1e-12;   // float dust guard on <= comparisons

bool order_less(const std::vector<PredictorId>& a, const std::vector<PredictorId>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double total_memory(std::span<const PredictorId> sps, const TaskProfiles& profiles) {
    double mem = profiles.fallback().memory_bytes;
    for (const auto& id : sps) mem += profiles.by_id(id).memory_bytes;
    return mem;
}

FeasibilityAudit check(double reference_accuracy, double candidate_accuracy, double memory_bytes,
                       double wcl_ms, const NodeConstraints& constraints,
                       const SchedulerParams& params) {
    FeasibilityAudit audit;
    audit.accuracy_drop = reference_accuracy - candidate_accuracy;
    audit.memory_bytes = memory_bytes;
    audit.worst_case_latency_ms = wcl_ms;
    if (audit.accuracy_drop > params.max_accuracy_drop + kTol)
        audit.violations.push_back("accuracy");
    if (memory_bytes > constraints.memory_budget_bytes + kTol)
        audit.violations.push_back("memory");
    if (wcl_ms > constraints.deadline_ms + kTol) audit.violations.push_back("latency");
    audit.feasible = audit.violations.empty();
    return audit;
}

std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) s += s.empty() ? p : "," + p;
    return s;
}

} // namespace

void SchedulerParams::validate() const {
    if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
    if (!(max_accuracy_drop >= 0.0 && max_accuracy_drop <= 1.0))
        throw std::invalid_argument("max_accuracy_drop must lie in [0,1]");
    if (gc_period < 1) throw std::invalid_argument("gc_period must be >= 1");
}

int SchedulerParams::effective_max_depth(const TaskProfiles& profiles) const {
    const int sp_count = static_cast<int>(profiles.sp_ids().size());
    int depth = max_depth < 0 ? sp_count : std::min(max_depth, sp_count);
    return std::min(depth, profiles.num_classes());
}

std::vector<std::vector<CandidateOrder>> beam_search_candidates(const TaskProfiles& profiles,
                                                                const ValidationStats& stats,
                                                                const SchedulerParams& params) {
    params.validate();
    const auto all_sps = profiles.sp_ids();
    if (all_sps.empty()) throw ConfigError("beam search needs at least one SP");
    const int max_depth = params.effective_max_depth(profiles);
    const std::span<const double> dist(stats.class_distribution);

    auto score = [&](const std::vector<PredictorId>& order) {
        return expected_cost(make_config(profiles, order), dist, profiles).macs;
    };

    std::vector<std::vector<CandidateOrder>> per_depth;
    per_depth.push_back({CandidateOrder{{}, score({})}});

    for (int depth = 1; depth <= max_depth; ++depth) {
        std::vector<CandidateOrder> extended;
        for (const auto& base : per_depth.back()) {
            for (const auto& sp : all_sps) {
                if (std::find(base.sps.begin(), base.sps.end(), sp) != base.sps.end()) continue;
                auto order = base.sps;
                order.push_back(sp);
                const double macs = score(order);
                extended.push_back(CandidateOrder{std::move(order), macs});
            }
        }
        std::sort(extended.begin(), extended.end(),
                  [](const CandidateOrder& a, const CandidateOrder& b) {
                      if (a.expected_macs != b.expected_macs)
                          return a.expected_macs < b.expected_macs;
                      return order_less(a.sps, b.sps);
                  });
        if (static_cast<int>(extended.size()) > params.beam_width)
            extended.resize(static_cast<std::size_t>(params.beam_width));
        per_depth.push_back(std::move(extended));
    }
    return per_depth;
}

SchedulingDecision audit_candidate(std::span<const PredictorId> order,
                                   const TaskProfiles& profiles, const ValidationStats& stats,
                                   const NodeConstraints& constraints,
                                   const SchedulerParams& params) {
    constraints.validate();
    SchedulingDecision d;
    d.config = make_config(profiles, {order.begin(), order.end()});
    const std::span<const double> dist(stats.class_distribution);
    d.expected = expected_cost(d.config, dist, profiles, {1.0, constraints.t_lc_ms});
    const auto acc = expected_accuracy(d.config, dist, profiles);
    d.expected_balanced_accuracy = acc.balanced;
    d.expected_plain_accuracy = acc.plain;
    d.audit = check(stats.fb_balanced_accuracy, acc.balanced, total_memory(order, profiles),
                    worst_case_latency(d.config, constraints, profiles), constraints, params);
    return d;
}

std::vector<SchedulingDecision> feasibility_filter(
    const std::vector<std::vector<CandidateOrder>>& candidates, const TaskProfiles& profiles,
    const ValidationStats& stats, const NodeConstraints& constraints,
    const SchedulerParams& params) {
    std::vector<SchedulingDecision> feasible;
    for (const auto& depth_list : candidates) {
        for (const auto& cand : depth_list) {
            auto decision = audit_candidate(cand.sps, profiles, stats, constraints, params);
            if (decision.audit.feasible) feasible.push_back(std::move(decision));
        }
    }
    if (feasible.empty()) {
        auto fb_only = audit_candidate({}, profiles, stats, constraints, params);
        if (!fb_only.audit.feasible)
            throw InfeasibleTaskError("no feasible cascade configuration (fallback-only violates: " +
                                          join(fb_only.audit.violations) + ")",
                                      fb_only.audit.violations);
        feasible.push_back(std::move(fb_only));
    }
    return feasible;
}

SchedulingDecision schedule(const TaskProfiles& profiles, const ValidationStats& stats,
                            const NodeConstraints& constraints, const SchedulerParams& params) {
    const auto candidates = beam_search_candidates(profiles, stats, params);
    auto feasible = feasibility_filter(candidates, profiles, stats, constraints, params);
    auto best = std::min_element(feasible.begin(), feasible.end(),
                                 [](const SchedulingDecision& a, const SchedulingDecision& b) {
                                     if (a.expected.macs != b.expected.macs)
                                         return a.expected.macs < b.expected.macs;
                                     return order_less(a.config.ordered_sps, b.config.ordered_sps);
                                 });
    return *best;
}

std::vector<ParetoPoint> pareto_sweep(const TaskProfiles& profiles, const ValidationStats& stats,
                                      const NodeConstraints& constraints,
                                      const SchedulerParams& params,
                                      std::span<const double> drop_grid) {
    if (!std::is_sorted(drop_grid.begin(), drop_grid.end()))
        throw std::invalid_argument("drop grid must be sorted ascending");
    std::vector<ParetoPoint> points;
    points.reserve(drop_grid.size());
    for (double budget : drop_grid) {
        SchedulerParams p = params;
        p.max_accuracy_drop = budget;
        ParetoPoint point;
        point.drop_budget = budget;
        try {
            point.decision = schedule(profiles, stats, constraints, p);
        } catch (const InfeasibleTaskError& e) {
            point.infeasible_reasons = e.reasons();
        }
        points.push_back(std::move(point));
    }
    return points;
}

namespace {

// EMA-weighted plain accuracy of always answering with the fallback.
double fb_plain_accuracy(std::span<const double> dist, const TaskProfiles& profiles) {
    const auto& confusion = profiles.fallback().confusion;
    double acc = 0;
    for (std::size_t c = 0; c < dist.size(); ++c) acc += dist[c] * confusion[c][c];
    return acc;
}

std::vector<PredictorId> sorted_by_ema(std::vector<PredictorId> sps, std::span<const double> ema,
                                       const TaskProfiles& profiles) {
    std::sort(sps.begin(), sps.end(), [&](const PredictorId& a, const PredictorId& b) {
        const double ea = ema[static_cast<std::size_t>(profiles.by_id(a).target)];
        const double eb = ema[static_cast<std::size_t>(profiles.by_id(b).target)];
        if (ea != eb) return ea > eb;
        return a < b;
    });
    return sps;
}

} // namespace

std::optional<SpDeployment> online_update(const NodeTelemetry& telemetry,
                                          const TaskProfiles& profiles,
                                          const NodeConstraints& constraints,
                                          const SchedulerParams& params) {
    const std::span<const double> ema(telemetry.ema);

    std::vector<PredictorId> missing;
    for (const auto& id : profiles.sp_ids())
        if (std::find(telemetry.stored_sps.begin(), telemetry.stored_sps.end(), id) ==
            telemetry.stored_sps.end())
            missing.push_back(id);
    if (missing.empty()) return std::nullopt;
    missing = sorted_by_ema(std::move(missing), ema, profiles);

    const auto current = make_config(profiles, telemetry.enabled_sps);
    const double current_macs = expected_cost(current, ema, profiles).macs;
    const double fb_reference = fb_plain_accuracy(ema, profiles);
    double stored_memory = total_memory(telemetry.stored_sps, profiles);

    for (const auto& cand : missing) {
        auto hypothetical_sps = telemetry.enabled_sps;
        hypothetical_sps.push_back(cand);
        hypothetical_sps = sorted_by_ema(std::move(hypothetical_sps), ema, profiles);
        const auto hypothetical = make_config(profiles, hypothetical_sps);

        const double plain = expected_accuracy(hypothetical, ema, profiles).plain;
        const double macs = expected_cost(hypothetical, ema, profiles).macs;
        const auto audit =
            check(fb_reference, plain, stored_memory + profiles.by_id(cand).memory_bytes,
                  worst_case_latency(hypothetical, constraints, profiles), constraints, params);
        if (audit.feasible && macs < current_macs) return SpDeployment{cand};
    }
    return std::nullopt;
}

} // namespace adacast
