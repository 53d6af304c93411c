#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "adacast/reporting.hpp"
#include "adacast/simulator.hpp"
#include "test_support.hpp"

using namespace adacast;
using namespace adacast::testing;

namespace {

NodeConstraints scd_constraints() { return {8e6, 50.0, 0.5}; }

SchedulerParams params_of(int gc_period = 200) {
    SchedulerParams p;
    p.max_accuracy_drop = 0.04;
    p.gc_period = gc_period;
    return p;
}

WorkloadScenario base_scenario(int length, std::uint64_t seed, int reps = 1) {
    WorkloadScenario s;
    s.kind = WorkloadScenario::Kind::Base;
    s.name = "base";
    s.length = length;
    s.repetitions = reps;
    s.seed = seed;
    return s;
}

} // namespace

TEST_CASE("base traces sample i.i.d. from the test distribution") {
    const auto task = make_task(2, {{"sp0", 0}, {"sp1", 1}});
    const std::vector<double> dist{0.5, 0.5};
    auto scenario = base_scenario(1000, 7);
    const auto trace = generate_trace(dist, scenario, {}, task);
    REQUIRE(trace.size() == 1000);
    long zeros = 0;
    for (auto c : trace) zeros += c == 0 ? 1 : 0;
    // 3 sigma binomial around 500
    const double sigma = std::sqrt(1000 * 0.25);
    CHECK(std::abs(zeros - 500.0) <= 3.0 * sigma);
}

TEST_CASE("mismatch minor boosts the last deployed SP class with renormalization") {
    const auto task = make_uniform_task(4, 0.9, 0.01);
    // last SP targets class 2, its mass 0.1 -> 0.5 / 1.4
    const std::vector<double> dist{0.5, 0.3, 0.1, 0.1};
    WorkloadScenario s;
    s.kind = WorkloadScenario::Kind::MismatchMinor;
    s.factor = 5.0;
    const std::vector<PredictorId> order{"sp0", "sp2"};
    const auto adjusted = scenario_distribution(dist, s, order, task);
    CHECK(adjusted[2] == doctest::Approx(0.5 / 1.4));
    CHECK(adjusted[0] == doctest::Approx(0.5 / 1.4));
    double sum = 0;
    for (double p : adjusted) sum += p;
    CHECK(sum == doctest::Approx(1.0));

    SUBCASE("minor needs a deployed order") {
        CHECK_THROWS_AS(scenario_distribution(dist, s, {}, task), ScenarioError);
    }
}

TEST_CASE("mismatch major makes the absent class modal and rejects deployed classes") {
    const auto task = make_scd_like();
    WorkloadScenario s;
    s.kind = WorkloadScenario::Kind::MismatchMajor;
    s.factor = 5.0;
    s.target_class = 0;
    const std::vector<PredictorId> order{"sp6", "sp2", "sp5"};
    const auto adjusted =
        scenario_distribution(task.stats().class_distribution, s, order, task);
    for (std::size_t c = 1; c < adjusted.size(); ++c) CHECK(adjusted[0] > adjusted[c]);

    s.target_class = 2;   // served by sp2
    CHECK_THROWS_AS(scenario_distribution(task.stats().class_distribution, s, order, task),
                    ScenarioError);
}

TEST_CASE("grow-length appends the replicated mass instead of reweighting") {
    const auto task = make_uniform_task(4, 0.9, 0.01);
    const std::vector<double> dist{0.25, 0.25, 0.25, 0.25};
    WorkloadScenario s;
    s.kind = WorkloadScenario::Kind::MismatchMajor;
    s.factor = 5.0;
    s.target_class = 0;
    s.length = 1000;
    s.grow_length = true;
    const std::vector<PredictorId> order{"sp1"};
    const auto trace = generate_trace(dist, s, order, task);
    // extra mass: (5-1) * 0.25 of the original length
    CHECK(trace.size() == 2000);
}

TEST_CASE("custom traces load labels from a file") {
    const auto task = make_uniform_task(3, 0.9, 0.01);
    const auto path = std::filesystem::temp_directory_path() / "adacast_trace.txt";
    {
        std::ofstream out(path);
        out << "0 1 2 2 1\n";
    }
    WorkloadScenario s;
    s.kind = WorkloadScenario::Kind::CustomTrace;
    s.trace_path = path;
    const auto trace = generate_trace({}, s, {}, task);
    CHECK(trace == std::vector<ClassLabel>{0, 1, 2, 2, 1});

    {
        std::ofstream out(path);
        out << "0 7\n";   // label out of range
    }
    CHECK_THROWS_AS(generate_trace({}, s, {}, task), ScenarioError);
}

TEST_CASE("a draining battery flips the LC into aggressive enabling") {
    const auto task = make_scd_like();
    const auto constraints = scd_constraints();
    const auto decision = schedule(task, task.stats(), constraints, params_of());
    auto scenario = base_scenario(400, 13);
    LcPolicy policy;
    policy.low_battery_mode = true;
    policy.battery_threshold = 0.5;
    policy.tau = 0.10;   // keeps the least frequent class (EMA ~0.07) disabled
    SimOptions opt;
    opt.gc_enabled = false;
    // mean energy ~8 mJ/inference: battery crosses 0.5 around inference 250
    opt.battery_capacity_mj = 4000.0;
    const auto run = run_simulation(task, decision, scenario, constraints, policy, params_of(),
                                    opt);
    const auto& early = run.records[100];
    const auto& late = run.records.back();
    CHECK(late.battery < 0.5);
    std::size_t early_enabled = 0, late_enabled = 0;
    for (bool b : early.enabled) early_enabled += b ? 1 : 0;
    for (bool b : late.enabled) late_enabled += b ? 1 : 0;
    // every stored SP enabled once the battery is low
    CHECK(late_enabled == late.order.size());
    CHECK(late_enabled > early_enabled);
}

TEST_CASE("scenario JSON round-trips through the documented schema") {
    const auto s = parse_scenario(R"({
        "kind": "mismatch_major", "name": "scd_major", "factor": 5,
        "target_class": 0, "length": 510, "repetitions": 3, "seed": 11,
        "resource_schedule": [[100, 1.5], [300, 1.0]]
    })");
    CHECK(s.kind == WorkloadScenario::Kind::MismatchMajor);
    CHECK(s.name == "scd_major");
    CHECK(s.target_class == 0);
    CHECK(s.length == 510);
    CHECK(s.repetitions == 3);
    CHECK(s.seed == 11);
    REQUIRE(s.resource_schedule.size() == 2);
    CHECK(s.resource_schedule[0] == std::pair<long, double>{100, 1.5});
    CHECK_THROWS_AS(parse_scenario("{\"kind\": \"nope\"}"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(R"({"kind": "base",
        "resource_schedule": [[5, 0.5]]})"),
                    ScenarioError);
    CHECK_THROWS_AS(parse_scenario(R"({"kind": "base",
        "resource_schedule": [[9, 1.5], [4, 1.5]]})"),
                    ScenarioError);
}

TEST_CASE("a scenario-declared resource schedule drives the node's cpu scale") {
    const auto task = make_scd_like();
    const auto decision = schedule(task, task.stats(), scd_constraints(), params_of());
    auto scenario = base_scenario(60, 8);
    scenario.resource_schedule = {{30, 2.0}};
    SimOptions opt;
    const auto run = run_simulation(task, decision, scenario, scd_constraints(), {}, params_of(),
                                    opt);
    CHECK(run.records[29].cpu_scale == 1.0);
    CHECK(run.records[30].cpu_scale == 2.0);
    CHECK(run.records.back().cpu_scale == 2.0);
}

TEST_CASE("record count is trace length times repetitions") {
    const auto task = make_scd_like();
    const auto decision = schedule(task, task.stats(), scd_constraints(), params_of());
    auto scenario = base_scenario(150, 3, 3);
    SimOptions opt;
    const auto run = run_simulation(task, decision, scenario, scd_constraints(), {}, params_of(),
                                    opt);
    CHECK(run.records.size() == 450);
    CHECK(run.summary.inferences == 450);
}

TEST_CASE("static mode runs the fallback at constant latency") {
    const auto task = make_scd_like();
    const auto decision = schedule(task, task.stats(), scd_constraints(), params_of());
    auto scenario = base_scenario(120, 5);
    SimOptions opt;
    opt.mode = AdaptationMode::Static;
    const auto run = run_simulation(task, decision, scenario, scd_constraints(), {}, params_of(),
                                    opt);
    for (const auto& r : run.records) {
        CHECK(r.outcome.latency_ms == doctest::Approx(14.24));
        CHECK(r.outcome.executed == std::vector<PredictorId>{"fb"});
    }
    CHECK(run.events.empty());
}

TEST_CASE("fixed seed reruns are bitwise identical") {
    const auto task = make_scd_like();
    const auto decision = schedule(task, task.stats(), scd_constraints(), params_of());
    auto scenario = base_scenario(300, 17);
    SimOptions opt;
    const auto a = run_simulation(task, decision, scenario, scd_constraints(), {}, params_of(50),
                                  opt);
    const auto b = run_simulation(task, decision, scenario, scd_constraints(), {}, params_of(50),
                                  opt);
    CHECK(records_csv(a) == records_csv(b));
    CHECK(events_csv(a) == events_csv(b));
    CHECK(fnv1a(records_csv(a)) == fnv1a(records_csv(b)));
}

TEST_CASE("threaded GC produces the same run as the inline GC") {
    const auto task = make_scd_like();
    const auto decision = schedule(task, task.stats(), scd_constraints(), params_of());
    WorkloadScenario scenario;
    scenario.kind = WorkloadScenario::Kind::MismatchMajor;
    scenario.target_class = 0;
    scenario.length = 400;
    scenario.repetitions = 1;
    scenario.seed = 23;

    SimOptions inline_opt;
    SimOptions threaded_opt;
    threaded_opt.threaded_gc = true;
    const auto a = run_simulation(task, decision, scenario, scd_constraints(), {}, params_of(100),
                                  inline_opt);
    const auto b = run_simulation(task, decision, scenario, scd_constraints(), {}, params_of(100),
                                  threaded_opt);
    CHECK(records_csv(a) == records_csv(b));
    CHECK(events_csv(a) == events_csv(b));

    SUBCASE("a delivery delay shifts reactions deterministically in both modes") {
        inline_opt.gc_delay = 15;
        threaded_opt.gc_delay = 15;
        const auto c = run_simulation(task, decision, scenario, scd_constraints(), {},
                                      params_of(100), inline_opt);
        const auto d = run_simulation(task, decision, scenario, scd_constraints(), {},
                                      params_of(100), threaded_opt);
        CHECK(events_csv(c) == events_csv(d));
    }
}

TEST_CASE("disabling the GC leaves zero GC events in the log") {
    const auto task = make_scd_like();
    const auto decision = schedule(task, task.stats(), scd_constraints(), params_of());
    WorkloadScenario scenario;
    scenario.kind = WorkloadScenario::Kind::MismatchMajor;
    scenario.target_class = 0;
    scenario.length = 450;
    scenario.repetitions = 1;
    scenario.seed = 2;
    SimOptions opt;
    opt.gc_enabled = false;
    const auto run = run_simulation(task, decision, scenario, scd_constraints(), {},
                                    params_of(100), opt);
    for (const auto& e : run.events) CHECK(e.source != "GC");
    CHECK(run.summary.gc_deployments == 0);
}

TEST_CASE("battery level never increases over a run") {
    const auto task = make_scd_like();
    const auto decision = schedule(task, task.stats(), scd_constraints(), params_of());
    auto scenario = base_scenario(400, 9);
    SimOptions opt;
    opt.battery_capacity_mj = 5000.0;
    const auto run = run_simulation(task, decision, scenario, scd_constraints(), {}, params_of(),
                                    opt);
    double prev = 1.0;
    for (const auto& r : run.records) {
        CHECK(r.battery <= prev + 1e-15);
        prev = r.battery;
    }
    CHECK(run.summary.final_battery < 1.0);
}

TEST_CASE("the latency bound holds after every adaptive step") {
    const auto task = make_scd_like();
    const auto constraints = scd_constraints();
    const auto decision = schedule(task, task.stats(), constraints, params_of());
    WorkloadScenario scenario;
    scenario.kind = WorkloadScenario::Kind::MismatchMajor;
    scenario.target_class = 0;
    scenario.length = 510;
    scenario.repetitions = 3;
    scenario.seed = 71;
    SimOptions opt;
    const auto run = run_simulation(task, decision, scenario, constraints, {}, params_of(), opt);
    for (const auto& r : run.records) {
        double wcl = constraints.t_lc_ms + task.fallback().latency_ms;
        for (std::size_t i = 0; i < r.order.size(); ++i)
            if (r.enabled[i]) wcl += task.by_id(r.order[i]).latency_ms;
        CHECK(wcl <= constraints.deadline_ms + 1e-12);
        CHECK(!r.deadline_miss);
    }
}

TEST_CASE("a cpu spike is recorded as a miss and triggers a safety shrink") {
    const auto task = make_scd_like();
    NodeConstraints constraints{8e6, 18.0, 0.5};
    const auto decision = schedule(task, task.stats(), constraints, params_of());
    REQUIRE(decision.config.ordered_sps.size() == 3);
    auto scenario = base_scenario(300, 31);
    SimOptions opt;
    opt.resource_schedule = {{100, 1.2}};   // 1.2x from record 100 onward
    const auto run = run_simulation(task, decision, scenario, constraints, {}, params_of(1000),
                                    opt);

    long first_miss = -1;
    for (const auto& r : run.records)
        if (r.deadline_miss && first_miss < 0) first_miss = r.index;
    REQUIRE(first_miss >= 100);

    long shrink_at = -1;
    for (const auto& e : run.events)
        if (e.action == "SAFETY_SHRINK" && shrink_at < 0) shrink_at = e.inference;
    REQUIRE(shrink_at >= 0);
    CHECK(shrink_at == first_miss + 1);   // reconcile runs within the missing inference

    // after the shrink the scaled bound holds again and misses stop
    for (const auto& r : run.records) {
        if (r.index <= first_miss) continue;
        CHECK(!r.deadline_miss);
    }
}

TEST_CASE("comparison rows share the trace and static energy is scenario-invariant") {
    const auto task = make_scd_like();
    const auto constraints = scd_constraints();
    const auto decision = schedule(task, task.stats(), constraints, params_of());

    const std::vector<AdaptationMode> modes{AdaptationMode::Static, AdaptationMode::Dynamic,
                                            AdaptationMode::Ours};
    auto base = base_scenario(250, 3);
    const auto rows =
        run_comparison(task, decision, base, constraints, {}, params_of(), {}, modes);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].summary.mean_energy_mj == doctest::Approx(18.13));

    WorkloadScenario major;
    major.kind = WorkloadScenario::Kind::MismatchMajor;
    major.target_class = 0;
    major.length = 400;
    major.repetitions = 2;
    major.seed = 3;
    const auto rows_major =
        run_comparison(task, decision, major, constraints, {}, params_of(), {}, modes);
    // static runs only the fallback: energy identical across scenarios
    CHECK(rows_major[0].summary.mean_energy_mj ==
          doctest::Approx(rows[0].summary.mean_energy_mj));
    // dynamic and ours see mismatch costs; ours adapts and pulls ahead
    CHECK(rows_major[2].summary.mean_latency_ms <
          rows_major[1].summary.mean_latency_ms);
}
