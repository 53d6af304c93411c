#include "adacast/cascade.hpp"

#include <algorithm>
#include <cmath>

namespace adacast {

CascadeConfig make_config(const TaskProfiles& profiles, std::vector<PredictorId> order) {
    return make_config(profiles, std::move(order), profiles.default_thr_minus(),
                       profiles.default_thr_plus());
}

CascadeConfig make_config(const TaskProfiles& profiles, std::vector<PredictorId> order,
                          double thr_minus, double thr_plus) {
    CascadeConfig cfg;
    cfg.ordered_sps = std::move(order);
    cfg.enabled.assign(cfg.ordered_sps.size(), true);
    cfg.fb = profiles.fallback().id;
    cfg.thr_minus = thr_minus;
    cfg.thr_plus = thr_plus;
    validate_config(cfg, profiles);
    return cfg;
}

void validate_config(const CascadeConfig& config, const TaskProfiles& profiles) {
    if (!(config.thr_minus >= 0.0 && config.thr_minus <= config.thr_plus &&
          config.thr_plus <= 1.0))
        throw ThresholdError("cascade thresholds must satisfy 0 <= thr_minus <= thr_plus <= 1");
    if (config.depth() > profiles.num_classes())
        throw ConfigError("cascade depth exceeds class count");
    if (config.enabled.size() != config.ordered_sps.size())
        throw ConfigError("enabled mask length must match cascade depth");
    if (!profiles.by_id(config.fb).is_fallback())
        throw ConfigError("cascade fb must reference the fallback profile");
    std::vector<bool> seen(static_cast<std::size_t>(profiles.num_classes()), false);
    for (const auto& id : config.ordered_sps) {
        const auto& p = profiles.by_id(id);
        if (p.is_fallback()) throw ConfigError("fallback cannot appear among ordered SPs");
        if (seen[static_cast<std::size_t>(p.target)])
            throw ConfigError("cascade SP targets must be pairwise distinct");
        seen[static_cast<std::size_t>(p.target)] = true;
    }
}

DrawnSample draw_sample(const TaskProfiles& profiles, ClassLabel true_class, Rng& rng) {
    DrawnSample s;
    s.true_class = true_class;
    s.confidence.reserve(profiles.predictors().size());
    s.label_u.reserve(profiles.predictors().size());
    for (const auto& p : profiles.predictors()) {
        s.confidence.push_back(sample_confidence(p, true_class, rng));
        s.label_u.push_back(rng.uniform());
    }
    return s;
}

const char* to_string(ExitKind kind) {
    switch (kind) {
    case ExitKind::AcceptAtSp: return "accept_at_sp";
    case ExitKind::UndecidedToFb: return "undecided_to_fb";
    case ExitKind::ExhaustedToFb: return "exhausted_to_fb";
    case ExitKind::FbOnly: return "fb_only";
    }
    return "?";
}

namespace {

ClassLabel draw_label(const std::vector<std::vector<double>>& confusion, ClassLabel true_class,
                      double u) {
    const auto& row = confusion[static_cast<std::size_t>(true_class)];
    double acc = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
        acc += row[c];
        if (u < acc) return static_cast<ClassLabel>(c);
    }
    return static_cast<ClassLabel>(row.size() - 1);
}

void account(InferenceOutcome& out, const PredictorProfile& p) {
    out.executed.push_back(p.id);
    out.macs += p.macs;
    out.latency_ms += p.latency_ms;
    out.energy_mj += p.energy_mj;
}

void finish_timing(InferenceOutcome& out, const LatencyModel& timing) {
    out.latency_ms = out.latency_ms * timing.cpu_scale + timing.t_lc_ms;
}

} // namespace

InferenceOutcome evaluate(const DrawnSample& sample, const CascadeConfig& config,
                          const TaskProfiles& profiles, const LatencyModel& timing) {
    InferenceOutcome out;
    bool to_fb = true;
    ExitKind fb_kind = ExitKind::ExhaustedToFb;
    int fb_position = -1;
    int position = 0;
    for (std::size_t i = 0; i < config.ordered_sps.size(); ++i) {
        if (!config.enabled[i]) continue;
        const auto& sp = profiles.by_id(config.ordered_sps[i]);
        const double conf = sample.confidence[static_cast<std::size_t>(profiles.index_of(sp.id))];
        account(out, sp);
        if (conf > config.thr_plus) {
            out.predicted = sp.target;
            out.exit = {ExitKind::AcceptAtSp, position};
            to_fb = false;
            break;
        }
        if (conf >= config.thr_minus) {
            // undecided: later SPs are unlikely to be confident, go straight to FB
            fb_kind = ExitKind::UndecidedToFb;
            fb_position = position;
            break;
        }
        ++position;
    }
    if (to_fb) {
        const auto& fb = profiles.by_id(config.fb);
        if (fb_kind == ExitKind::ExhaustedToFb && position == 0) fb_kind = ExitKind::FbOnly;
        account(out, fb);
        out.predicted =
            draw_label(fb.confusion, sample.true_class,
                       sample.label_u[static_cast<std::size_t>(profiles.index_of(fb.id))]);
        out.exit = {fb_kind, fb_position};
    }
    finish_timing(out, timing);
    return out;
}

BigLittleSample draw_big_little_sample(const PredictorProfile& little, ClassLabel true_class,
                                       Rng& rng) {
    BigLittleSample s;
    s.true_class = true_class;
    s.little_confidence = sample_confidence(little, true_class, rng);
    s.little_label_u = rng.uniform();
    s.big_label_u = rng.uniform();
    return s;
}

InferenceOutcome big_little_evaluate(const BigLittleSample& sample,
                                     const PredictorProfile& little, const PredictorProfile& big,
                                     double tau, const LatencyModel& timing) {
    if (little.confusion.empty() || big.confusion.empty())
        throw ConfigError("big-little models need confusion rows");
    InferenceOutcome out;
    account(out, little);
    if (sample.little_confidence >= tau) {
        out.predicted = draw_label(little.confusion, sample.true_class, sample.little_label_u);
        out.exit = {ExitKind::AcceptAtSp, 0};
    } else {
        account(out, big);
        out.predicted = draw_label(big.confusion, sample.true_class, sample.big_label_u);
        out.exit = {ExitKind::UndecidedToFb, 0};
    }
    finish_timing(out, timing);
    return out;
}

double worst_case_latency(const CascadeConfig& config, const NodeConstraints& constraints,
                          const TaskProfiles& profiles, double cpu_scale) {
    double models = profiles.by_id(config.fb).latency_ms;
    for (std::size_t i = 0; i < config.ordered_sps.size(); ++i)
        if (config.enabled[i]) models += profiles.by_id(config.ordered_sps[i]).latency_ms;
    return constraints.t_lc_ms + cpu_scale * models;
}

ExpectedCost expected_cost(const CascadeConfig& config, std::span<const double> dist,
                           const TaskProfiles& profiles, const LatencyModel& timing) {
    const auto& fb = profiles.by_id(config.fb);
    ExpectedCost total;
    for (std::size_t c = 0; c < dist.size(); ++c) {
        if (dist[c] == 0) continue;
        const auto cls = static_cast<ClassLabel>(c);
        double reach = 1.0;
        double p_fb = 0.0;
        ExpectedCost per_class;
        for (std::size_t i = 0; i < config.ordered_sps.size(); ++i) {
            if (!config.enabled[i]) continue;
            const auto& sp = profiles.by_id(config.ordered_sps[i]);
            const auto exit = exit_probabilities(sp, cls, config.thr_minus, config.thr_plus);
            per_class.macs += reach * sp.macs;
            per_class.latency_ms += reach * sp.latency_ms;
            per_class.energy_mj += reach * sp.energy_mj;
            p_fb += reach * exit.undecided;
            reach *= exit.reject;
        }
        p_fb += reach;
        per_class.macs += p_fb * fb.macs;
        per_class.latency_ms += p_fb * fb.latency_ms;
        per_class.energy_mj += p_fb * fb.energy_mj;
        total.macs += dist[c] * per_class.macs;
        total.latency_ms += dist[c] * per_class.latency_ms;
        total.energy_mj += dist[c] * per_class.energy_mj;
    }
    total.latency_ms = total.latency_ms * timing.cpu_scale + timing.t_lc_ms;
    return total;
}

AccuracyEstimate expected_accuracy(const CascadeConfig& config, std::span<const double> dist,
                                   const TaskProfiles& profiles) {
    const auto& fb = profiles.by_id(config.fb);
    const int n = profiles.num_classes();
    AccuracyEstimate est;
    est.per_class_recall.resize(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < n; ++c) {
        double reach = 1.0;
        double p_fb = 0.0;
        double correct = 0.0;
        for (std::size_t i = 0; i < config.ordered_sps.size(); ++i) {
            if (!config.enabled[i]) continue;
            const auto& sp = profiles.by_id(config.ordered_sps[i]);
            const auto exit = exit_probabilities(sp, c, config.thr_minus, config.thr_plus);
            if (sp.target == c) correct += reach * exit.accept;
            p_fb += reach * exit.undecided;
            reach *= exit.reject;
        }
        p_fb += reach;
        correct += p_fb * fb.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        est.per_class_recall[static_cast<std::size_t>(c)] = correct;
        est.balanced += correct;
        if (static_cast<std::size_t>(c) < dist.size()) est.plain += dist[c] * correct;
    }
    est.balanced /= static_cast<double>(n);
    return est;
}

double expected_balanced_accuracy(const CascadeConfig& config, std::span<const double> dist,
                                  const TaskProfiles& profiles) {
    return expected_accuracy(config, dist, profiles).balanced;
}

} // namespace adacast
