#include "adacast/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

#include "adacast/reporting.hpp"

namespace adacast {

void WorkloadScenario::validate() const {
    if (!(factor >= 1.0)) throw ScenarioError("scenario factor must be >= 1");
    if (repetitions < 1) throw ScenarioError("scenario repetitions must be >= 1");
    if (length < 1 && kind != Kind::CustomTrace)
        throw ScenarioError("scenario length must be >= 1");
    if (kind == Kind::MismatchMajor && target_class < 0)
        throw ScenarioError("mismatch_major needs a target_class");
    long prev = -1;
    for (const auto& [index, scale] : resource_schedule) {
        if (index < 0 || index <= prev)
            throw ScenarioError("resource schedule indices must be ascending");
        if (!(scale >= 1.0)) throw ScenarioError("resource schedule cpu_scale must be >= 1");
        prev = index;
    }
}

namespace {

using nlohmann::json;

WorkloadScenario::Kind parse_kind(const std::string& kind) {
    if (kind == "base") return WorkloadScenario::Kind::Base;
    if (kind == "mismatch_minor") return WorkloadScenario::Kind::MismatchMinor;
    if (kind == "mismatch_major") return WorkloadScenario::Kind::MismatchMajor;
    if (kind == "custom_trace") return WorkloadScenario::Kind::CustomTrace;
    throw ScenarioError("unknown scenario kind: " + kind);
}

} // namespace

WorkloadScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scenario file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto scenario = parse_scenario(buf.str());
    if (scenario.kind == WorkloadScenario::Kind::CustomTrace &&
        scenario.trace_path.is_relative())
        scenario.trace_path = path.parent_path() / scenario.trace_path;
    return scenario;
}

WorkloadScenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }
    WorkloadScenario s;
    try {
        s.kind = parse_kind(root.at("kind").get<std::string>());
        s.name = root.value("name", root.at("kind").get<std::string>());
        s.factor = root.value("factor", 5.0);
        s.target_class = root.value("target_class", -1);
        s.length = root.value("length", 510);
        s.repetitions = root.value("repetitions", 3);
        s.seed = root.value("seed", std::uint64_t{1});
        s.grow_length = root.value("grow_length", false);
        if (root.contains("distribution"))
            s.distribution = root.at("distribution").get<std::vector<double>>();
        if (root.contains("trace_path"))
            s.trace_path = root.at("trace_path").get<std::string>();
        if (root.contains("resource_schedule"))
            for (const auto& entry : root.at("resource_schedule"))
                s.resource_schedule.emplace_back(entry.at(0).get<long>(),
                                                 entry.at(1).get<double>());
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario schema error: ") + e.what());
    }
    s.validate();
    return s;
}

std::vector<double> scenario_distribution(std::span<const double> test_distribution,
                                          const WorkloadScenario& scenario,
                                          std::span<const PredictorId> deployed_order,
                                          const TaskProfiles& profiles) {
    std::vector<double> dist(test_distribution.begin(), test_distribution.end());
    ClassLabel boosted = -1;
    switch (scenario.kind) {
    case WorkloadScenario::Kind::Base:
    case WorkloadScenario::Kind::CustomTrace:
        return dist;
    case WorkloadScenario::Kind::MismatchMinor: {
        if (deployed_order.empty())
            throw ScenarioError("mismatch_minor needs a non-empty deployed order");
        boosted = profiles.by_id(deployed_order.back()).target;
        break;
    }
    case WorkloadScenario::Kind::MismatchMajor: {
        boosted = scenario.target_class;
        for (const auto& id : deployed_order)
            if (profiles.by_id(id).target == boosted)
                throw ScenarioError("mismatch_major class " + std::to_string(boosted) +
                                    " is served by deployed SP " + id);
        break;
    }
    }
    if (boosted < 0 || boosted >= static_cast<ClassLabel>(dist.size()))
        throw ScenarioError("scenario boost class out of range");
    dist[static_cast<std::size_t>(boosted)] *= scenario.factor;
    double total = 0;
    for (double p : dist) total += p;
    for (double& p : dist) p /= total;
    return dist;
}

std::vector<ClassLabel> generate_trace(std::span<const double> test_distribution,
                                       const WorkloadScenario& scenario,
                                       std::span<const PredictorId> deployed_order,
                                       const TaskProfiles& profiles) {
    scenario.validate();
    if (scenario.kind == WorkloadScenario::Kind::CustomTrace) {
        std::ifstream in(scenario.trace_path);
        if (!in) throw ScenarioError("cannot open trace file: " + scenario.trace_path.string());
        std::vector<ClassLabel> trace;
        int label;
        while (in >> label) {
            if (label < 0 || label >= profiles.num_classes())
                throw ScenarioError("trace label out of range: " + std::to_string(label));
            trace.push_back(label);
        }
        if (trace.empty()) throw ScenarioError("empty custom trace");
        return trace;
    }

    const auto dist =
        scenario_distribution(test_distribution, scenario, deployed_order, profiles);

    long n = scenario.length;
    if (scenario.grow_length && scenario.kind != WorkloadScenario::Kind::Base) {
        // grow-length option: keep the original samples and append the
        // replicated class mass instead of reweighting at fixed length
        const std::size_t boosted = [&] {
            if (scenario.kind == WorkloadScenario::Kind::MismatchMinor)
                return static_cast<std::size_t>(profiles.by_id(deployed_order.back()).target);
            return static_cast<std::size_t>(scenario.target_class);
        }();
        const double extra = (scenario.factor - 1.0) * test_distribution[boosted];
        n = std::lround(static_cast<double>(scenario.length) * (1.0 + extra));
    }

    std::vector<double> cdf(dist.size());
    double acc = 0;
    for (std::size_t c = 0; c < dist.size(); ++c) {
        acc += dist[c];
        cdf[c] = acc;
    }
    cdf.back() = 1.0;

    Rng rng = Rng::stream(scenario.seed, 0x7261CE);
    std::vector<ClassLabel> trace(static_cast<std::size_t>(n));
    for (auto& label : trace) {
        const double u = rng.uniform();
        label = static_cast<ClassLabel>(
            std::lower_bound(cdf.begin(), cdf.end(), u, std::less_equal<double>()) - cdf.begin());
    }
    return trace;
}

const char* to_string(AdaptationMode mode) {
    switch (mode) {
    case AdaptationMode::Static: return "static";
    case AdaptationMode::Dynamic: return "dynamic";
    case AdaptationMode::Ours: return "ours";
    }
    return "?";
}

RunSummary summarize(const std::vector<StepRecord>& records, const std::vector<SimEvent>& events,
                     int num_classes) {
    RunSummary s;
    s.inferences = static_cast<long>(records.size());
    if (records.empty()) return s;
    std::vector<double> latencies;
    latencies.reserve(records.size());
    std::vector<long> per_class_total(static_cast<std::size_t>(num_classes), 0);
    std::vector<long> per_class_correct(static_cast<std::size_t>(num_classes), 0);
    long correct = 0;
    for (const auto& r : records) {
        s.mean_latency_ms += r.outcome.latency_ms;
        s.mean_energy_mj += r.outcome.energy_mj;
        s.mean_macs += r.outcome.macs;
        latencies.push_back(r.outcome.latency_ms);
        if (r.deadline_miss) ++s.deadline_misses;
        per_class_total[static_cast<std::size_t>(r.true_class)]++;
        if (r.outcome.predicted == r.true_class) {
            per_class_correct[static_cast<std::size_t>(r.true_class)]++;
            ++correct;
        }
    }
    const auto n = static_cast<double>(records.size());
    s.mean_latency_ms /= n;
    s.mean_energy_mj /= n;
    s.mean_macs /= n;
    s.plain_accuracy = static_cast<double>(correct) / n;

    int observed = 0;
    for (int c = 0; c < num_classes; ++c) {
        if (per_class_total[static_cast<std::size_t>(c)] == 0) continue;
        ++observed;
        s.balanced_accuracy += static_cast<double>(per_class_correct[static_cast<std::size_t>(c)]) /
                               static_cast<double>(per_class_total[static_cast<std::size_t>(c)]);
    }
    if (observed > 0) s.balanced_accuracy /= observed;

    std::sort(latencies.begin(), latencies.end());
    const auto pick = [&](double q) {
        const auto idx = static_cast<std::size_t>(
            std::min<double>(std::ceil(q * static_cast<double>(latencies.size())) - 1,
                             static_cast<double>(latencies.size() - 1)));
        return latencies[std::max<std::size_t>(idx, 0)];
    };
    s.p50_latency_ms = pick(0.50);
    s.p95_latency_ms = pick(0.95);
    s.p99_latency_ms = pick(0.99);
    s.final_battery = records.back().battery;
    for (const auto& e : events) {
        if (e.source == "LC") ++s.lc_actions;
        if (e.source == "GC" && e.action == "DEPLOY") ++s.gc_deployments;
    }
    return s;
}

namespace {

struct PendingGcJob {
    long process_count;                                  // when the GC logically reacts
    NodeTelemetry snapshot;
    std::future<std::optional<SpDeployment>> async_result;
    std::optional<SpDeployment> inline_result;
    bool threaded;

    std::optional<SpDeployment> take() {
        return threaded ? async_result.get() : inline_result;
    }
};

struct PendingDelivery {
    long deliver_count;
    SpDeployment deployment;
};

double synthetic_temperature(long count) {
    return 42.0 + 6.0 * std::sin(static_cast<double>(count) / 150.0);
}

} // namespace

SimulationRun run_simulation(const TaskProfiles& profiles, const SchedulingDecision& decision,
                             const WorkloadScenario& scenario, const NodeConstraints& constraints,
                             const LcPolicy& lc_policy, const SchedulerParams& sched_params,
                             const SimOptions& options) {
    constraints.validate();
    lc_policy.validate();
    require_fallback_fits(constraints, profiles);
    const auto& resource_schedule = options.resource_schedule.empty()
                                        ? scenario.resource_schedule
                                        : options.resource_schedule;
    for (const auto& [idx, scale] : resource_schedule)
        if (scale < 1.0)
            throw std::invalid_argument("resource schedule cpu_scale must be >= 1");

    const std::span<const double> test_dist = scenario.distribution.empty()
                                                  ? std::span<const double>(
                                                        profiles.stats().class_distribution)
                                                  : std::span<const double>(scenario.distribution);
    const auto trace =
        generate_trace(test_dist, scenario, decision.config.ordered_sps, profiles);
    const auto trace_len = static_cast<long>(trace.size());
    const long total = trace_len * scenario.repetitions;

    const bool adaptive = options.mode == AdaptationMode::Ours;
    CascadeConfig config = options.mode == AdaptationMode::Static
                               ? make_config(profiles, {})
                               : decision.config;
    const double t_lc = adaptive ? constraints.t_lc_ms : 0.0;

    LocalStore store;
    for (const auto& id : config.ordered_sps) store.stored.insert(id);
    EmaState ema = make_ema(lc_policy.alpha, profiles.stats().class_distribution);

    Rng conf_rng = Rng::stream(scenario.seed, 0xC0FFEE);

    SimulationRun run;
    run.records.reserve(static_cast<std::size_t>(total));

    NodeSimState node;
    long misses = 0;
    std::size_t schedule_pos = 0;
    std::deque<PendingGcJob> gc_jobs;
    std::deque<PendingDelivery> deliveries;

    for (long i = 0; i < total; ++i) {
        node.clock = i;
        const long count = i + 1;

        // due GC reactions and SP deliveries from earlier ticks
        while (!gc_jobs.empty() && gc_jobs.front().process_count < count) {
            auto job = std::move(gc_jobs.front());
            gc_jobs.pop_front();
            if (auto deployment = job.take()) {
                SimEvent ev;
                ev.inference = job.process_count;
                ev.source = "GC";
                ev.action = "DEPLOY";
                ev.sp = deployment->sp;
                ev.detail = deployment_message(*deployment, job.process_count);
                ev.ema = job.snapshot.ema;
                run.events.push_back(std::move(ev));
                deliveries.push_back({job.process_count + options.gc_delay, *deployment});
            }
        }
        while (!deliveries.empty() && deliveries.front().deliver_count < count) {
            store.stored.insert(deliveries.front().deployment.sp);
            deliveries.pop_front();
        }
        while (schedule_pos < resource_schedule.size() &&
               resource_schedule[schedule_pos].first <= i) {
            node.cpu_scale = resource_schedule[schedule_pos].second;
            ++schedule_pos;
        }

        const ClassLabel truth = trace[static_cast<std::size_t>(i % trace_len)];
        const DrawnSample sample = draw_sample(profiles, truth, conf_rng);
        const InferenceOutcome outcome =
            evaluate(sample, config, profiles, LatencyModel{node.cpu_scale, t_lc});

        node.battery_level = std::max(
            0.0, node.battery_level - outcome.energy_mj / options.battery_capacity_mj);
        const bool miss = outcome.latency_ms > constraints.deadline_ms;
        if (miss) ++misses;

        if (adaptive) {
            const auto step = on_inference(outcome, ema, store, config, constraints, lc_policy,
                                           profiles, count, node.cpu_scale, node.battery_level);
            for (const auto& action : step.actions) {
                SimEvent ev;
                ev.inference = count;
                ev.source = "LC";
                ev.action = to_string(action.kind);
                ev.sp = action.sp;
                ev.ema = ema.values;
                run.events.push_back(std::move(ev));
            }

            if (options.gc_enabled && count % sched_params.gc_period == 0) {
                NodeTelemetry t;
                t.inference_count = count;
                t.ema = ema.values;
                t.battery_level = node.battery_level;
                t.temperature_c = synthetic_temperature(count);
                t.deadline_misses = misses;
                t.enabled_sps = config.enabled_sps();
                t.stored_sps.assign(store.stored.begin(), store.stored.end());

                SimEvent ev;
                ev.inference = count;
                ev.source = "GC";
                ev.action = "TELEMETRY";
                ev.detail = telemetry_message(t);
                ev.ema = t.ema;
                run.events.push_back(std::move(ev));

                PendingGcJob job;
                job.process_count = count + options.gc_delay;
                job.snapshot = t;
                job.threaded = options.threaded_gc;
                if (options.threaded_gc) {
                    job.async_result = std::async(
                        std::launch::async,
                        [snapshot = job.snapshot, &profiles, &constraints, &sched_params] {
                            return online_update(snapshot, profiles, constraints, sched_params);
                        });
                } else {
                    job.inline_result =
                        online_update(job.snapshot, profiles, constraints, sched_params);
                }
                gc_jobs.push_back(std::move(job));
            }
        }

        StepRecord rec;
        rec.index = i;
        rec.true_class = truth;
        rec.outcome = outcome;
        rec.deadline_miss = miss;
        rec.cpu_scale = node.cpu_scale;
        rec.battery = node.battery_level;
        rec.order = config.ordered_sps;
        rec.enabled = config.enabled;
        if (adaptive) rec.ema = ema.values;
        run.records.push_back(std::move(rec));
    }

    // drain unprocessed async jobs; their reactions fall past the run end
    for (auto& job : gc_jobs)
        if (job.threaded) job.async_result.wait();

    run.summary = summarize(run.records, run.events, profiles.num_classes());
    return run;
}

std::vector<ComparisonRow> run_comparison(const TaskProfiles& profiles,
                                          const SchedulingDecision& decision,
                                          const WorkloadScenario& scenario,
                                          const NodeConstraints& constraints,
                                          const LcPolicy& lc_policy,
                                          const SchedulerParams& sched_params,
                                          const SimOptions& options,
                                          std::span<const AdaptationMode> modes) {
    std::vector<ComparisonRow> rows;
    for (const auto mode : modes) {
        SimOptions per_mode = options;
        per_mode.mode = mode;
        const auto run = run_simulation(profiles, decision, scenario, constraints, lc_policy,
                                        sched_params, per_mode);
        rows.push_back({scenario.name, mode, run.summary});
    }
    return rows;
}

} // namespace adacast
