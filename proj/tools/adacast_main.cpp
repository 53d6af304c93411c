// Command-line entry point: load a calibration, run scheduling, Pareto
// sweeps, closed-loop simulations and mode comparisons, and emit CSV/JSON
// reports. See the README for the file formats.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "adacast/errors.hpp"
#include "adacast/reporting.hpp"
#include "adacast/scheduler.hpp"
#include "adacast/simulator.hpp"

namespace {

using namespace adacast;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitInputError = 3;

struct CommonOptions {
    std::string calibration;
    double deadline_ms = 50.0;
    double memory_bytes = 8e6;
    double t_lc_ms = 0.02;
    int beam_width = 128;
    int max_depth = -1;
    double max_drop = 0.04;
    double alpha = 0.01;
    double tau = 0.05;
    int reconcile_period = 20;
    int gc_period = 200;
    std::string gc_delay = "0";
    long long seed = -1;             ///< -1: keep the scenario's own seed
    std::string out_dir;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--calibration", opt.calibration, "calibration file (JSON)")
        ->required();
    cmd->add_option("--deadline-ms", opt.deadline_ms, "per-inference deadline D_t [ms]");
    cmd->add_option("--memory-bytes", opt.memory_bytes, "node memory budget [bytes]");
    cmd->add_option("--t-lc-ms", opt.t_lc_ms, "reserved LC actuation budget T_LC [ms]");
    cmd->add_option("--beam-width", opt.beam_width, "beam width per depth");
    cmd->add_option("--max-depth", opt.max_depth, "maximum cascade depth (-1: all SPs)");
    cmd->add_option("--max-drop", opt.max_drop, "balanced-accuracy drop budget");
    cmd->add_option("--alpha", opt.alpha, "EMA smoothing factor");
    cmd->add_option("--tau", opt.tau, "LC class-frequency threshold");
    cmd->add_option("--reconcile-period", opt.reconcile_period,
                    "inferences between periodic LC reconciles");
    cmd->add_option("--gc-period", opt.gc_period, "inferences between GC online updates");
    cmd->add_option("--gc-delay", opt.gc_delay,
                    "message delivery delay in inferences, or 'inf' to disable the GC");
    cmd->add_option("--seed", opt.seed, "override the scenario seed");
    cmd->add_option("--out", opt.out_dir,
                    "output directory (default: $ADACAST_OUT or current directory)");
}

std::filesystem::path resolve_out_dir(const CommonOptions& opt) {
    std::string dir = opt.out_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("ADACAST_OUT")) dir = env;
        if (dir.empty()) dir = ".";
    }
    std::filesystem::create_directories(dir);
    return dir;
}

NodeConstraints constraints_of(const CommonOptions& opt) {
    NodeConstraints c{opt.memory_bytes, opt.deadline_ms, opt.t_lc_ms};
    c.validate();
    return c;
}

SchedulerParams scheduler_params_of(const CommonOptions& opt) {
    SchedulerParams p;
    p.beam_width = opt.beam_width;
    p.max_depth = opt.max_depth;
    p.max_accuracy_drop = opt.max_drop;
    p.gc_period = opt.gc_period;
    p.validate();
    return p;
}

LcPolicy lc_policy_of(const CommonOptions& opt) {
    LcPolicy p;
    p.alpha = opt.alpha;
    p.tau = opt.tau;
    p.t_lc_ms = opt.t_lc_ms;
    p.reconcile_period = opt.reconcile_period;
    p.validate();
    return p;
}

SimOptions sim_options_of(const CommonOptions& opt) {
    SimOptions s;
    if (opt.gc_delay == "inf") {
        s.gc_enabled = false;
    } else {
        s.gc_delay = std::stol(opt.gc_delay);
        if (s.gc_delay < 0) throw InputError("--gc-delay must be >= 0 or 'inf'");
    }
    return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
    std::cout << "wrote " << path.string() << "\n";
}

/// Scenario presets runnable by name; anything else is read as a file.
WorkloadScenario resolve_scenario(const std::string& spec_arg, const TaskProfiles& profiles,
                                  const SchedulingDecision& decision, int length,
                                  int repetitions) {
    WorkloadScenario s;
    if (spec_arg == "base") {
        s.kind = WorkloadScenario::Kind::Base;
        s.name = "base";
    } else if (spec_arg == "mismatch-minor") {
        s.kind = WorkloadScenario::Kind::MismatchMinor;
        s.name = "mismatch_minor";
    } else if (spec_arg == "mismatch-major") {
        s.kind = WorkloadScenario::Kind::MismatchMajor;
        s.name = "mismatch_major";
        // first class no deployed SP serves
        std::vector<bool> served(static_cast<std::size_t>(profiles.num_classes()), false);
        for (const auto& id : decision.config.ordered_sps)
            served[static_cast<std::size_t>(profiles.by_id(id).target)] = true;
        s.target_class = -1;
        for (int c = 0; c < profiles.num_classes(); ++c)
            if (!served[static_cast<std::size_t>(c)]) {
                s.target_class = c;
                break;
            }
        if (s.target_class < 0)
            throw ScenarioError("mismatch-major preset needs a class without a deployed SP");
    } else {
        return load_scenario(spec_arg);
    }
    s.length = length;
    s.repetitions = repetitions;
    return s;
}

int cmd_schedule(const CommonOptions& opt) {
    const auto profiles = load_task_profiles(opt.calibration);
    for (const auto& w : profiles.warnings()) std::cerr << "warning: " << w << "\n";
    const auto decision = schedule(profiles, profiles.stats(), constraints_of(opt),
                                   scheduler_params_of(opt));
    const auto out = resolve_out_dir(opt) / (profiles.task() + "_decision.json");
    write_file(out, decision_json(decision, profiles, constraints_of(opt)));

    std::cout << "task " << profiles.task() << ": order [";
    for (std::size_t i = 0; i < decision.config.ordered_sps.size(); ++i)
        std::cout << (i ? ", " : "") << decision.config.ordered_sps[i];
    std::cout << "], expected macs " << format_double(decision.expected.macs)
              << ", expected balanced accuracy "
              << format_double(decision.expected_balanced_accuracy) << "\n";
    return kExitOk;
}

int cmd_pareto(const CommonOptions& opt, double grid_max, double grid_step) {
    const auto profiles = load_task_profiles(opt.calibration);
    std::vector<double> grid;
    for (double b = 0.0; b <= grid_max + 1e-12; b += grid_step) grid.push_back(b);
    const auto points = pareto_sweep(profiles, profiles.stats(), constraints_of(opt),
                                     scheduler_params_of(opt), grid);
    const auto out = resolve_out_dir(opt) / (profiles.task() + "_pareto.csv");
    write_file(out, pareto_csv(points, profiles));
    for (const auto& p : points) {
        std::cout << "drop " << format_double(p.drop_budget) << ": ";
        if (p.decision)
            std::cout << "macs " << format_double(p.decision->expected.macs) << "\n";
        else
            std::cout << "infeasible\n";
    }
    return kExitOk;
}

void print_summary(const std::string& label, const RunSummary& s) {
    std::cout << label << ": n=" << s.inferences << " mean_latency=" << s.mean_latency_ms
              << "ms p95=" << s.p95_latency_ms << "ms mean_energy=" << s.mean_energy_mj
              << "mJ balanced_acc=" << s.balanced_accuracy << " misses=" << s.deadline_misses
              << " gc_deployments=" << s.gc_deployments << "\n";
}

int cmd_simulate(const CommonOptions& opt, const std::string& scenario_arg,
                 const std::string& mode_arg, bool threaded, int length, int repetitions) {
    const auto profiles = load_task_profiles(opt.calibration);
    const auto constraints = constraints_of(opt);
    const auto params = scheduler_params_of(opt);
    const auto decision = schedule(profiles, profiles.stats(), constraints, params);

    auto scenario = resolve_scenario(scenario_arg, profiles, decision, length, repetitions);
    if (opt.seed >= 0) scenario.seed = static_cast<std::uint64_t>(opt.seed);

    SimOptions sim = sim_options_of(opt);
    sim.threaded_gc = threaded;
    if (mode_arg == "static")
        sim.mode = AdaptationMode::Static;
    else if (mode_arg == "dynamic")
        sim.mode = AdaptationMode::Dynamic;
    else if (mode_arg == "ours")
        sim.mode = AdaptationMode::Ours;
    else
        throw InputError("unknown mode: " + mode_arg);

    const auto run = run_simulation(profiles, decision, scenario, constraints,
                                    lc_policy_of(opt), params, sim);

    const auto dir = resolve_out_dir(opt);
    const auto stem = profiles.task() + "_" + scenario.name + "_" + mode_arg;
    write_file(dir / (stem + "_records.csv"), records_csv(run));
    write_file(dir / (stem + "_events.csv"), events_csv(run));
    write_file(dir / (stem + "_summary.json"), summary_json(run.summary));
    print_summary(stem, run.summary);
    return kExitOk;
}

int cmd_compare(const CommonOptions& opt, std::vector<std::string> scenario_args, int length,
                int repetitions) {
    const auto profiles = load_task_profiles(opt.calibration);
    const auto constraints = constraints_of(opt);
    const auto params = scheduler_params_of(opt);
    const auto decision = schedule(profiles, profiles.stats(), constraints, params);

    if (scenario_args.empty())
        scenario_args = {"base", "mismatch-minor", "mismatch-major"};

    const std::vector<AdaptationMode> modes{AdaptationMode::Static, AdaptationMode::Dynamic,
                                            AdaptationMode::Ours};
    std::vector<ComparisonRow> rows;
    for (const auto& arg : scenario_args) {
        auto scenario = resolve_scenario(arg, profiles, decision, length, repetitions);
        if (opt.seed >= 0) scenario.seed = static_cast<std::uint64_t>(opt.seed);
        const auto scenario_rows =
            run_comparison(profiles, decision, scenario, constraints, lc_policy_of(opt), params,
                           sim_options_of(opt), modes);
        rows.insert(rows.end(), scenario_rows.begin(), scenario_rows.end());
    }
    const auto out = resolve_out_dir(opt) / (profiles.task() + "_compare.csv");
    write_file(out, comparison_csv(rows));
    for (const auto& r : rows)
        print_summary(r.scenario + "/" + to_string(r.mode), r.summary);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive SP-cascade scheduling and simulation"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto* sched = app.add_subcommand("schedule", "select the minimum-cost feasible cascade");
    add_common_flags(sched, opt);

    auto* pareto = app.add_subcommand("pareto", "sweep the accuracy-drop budget");
    add_common_flags(pareto, opt);
    double grid_max = 0.10, grid_step = 0.01;
    pareto->add_option("--grid-max", grid_max, "largest drop budget");
    pareto->add_option("--grid-step", grid_step, "budget step");

    auto* sim = app.add_subcommand("simulate", "run the closed loop over a scenario");
    add_common_flags(sim, opt);
    std::string scenario_arg = "base";
    std::string mode_arg = "ours";
    bool threaded = false;
    int length = 510, repetitions = 3;
    sim->add_option("--scenario", scenario_arg,
                    "scenario file or preset (base | mismatch-minor | mismatch-major)");
    sim->add_option("--mode", mode_arg, "static | dynamic | ours");
    sim->add_flag("--threaded-gc", threaded, "run the GC on a worker thread");
    sim->add_option("--length", length, "preset samples per repetition");
    sim->add_option("--repetitions", repetitions, "preset trace repetitions");

    auto* cmp = app.add_subcommand("compare", "run static/dynamic/ours over scenarios");
    add_common_flags(cmp, opt);
    std::vector<std::string> cmp_scenarios;
    cmp->add_option("--scenario", cmp_scenarios,
                    "scenario files or presets (repeatable; default: all three presets)");
    cmp->add_option("--length", length, "preset samples per repetition");
    cmp->add_option("--repetitions", repetitions, "preset trace repetitions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sched->parsed()) return cmd_schedule(opt);
        if (pareto->parsed()) return cmd_pareto(opt, grid_max, grid_step);
        if (sim->parsed())
            return cmd_simulate(opt, scenario_arg, mode_arg, threaded, length, repetitions);
        if (cmp->parsed()) return cmd_compare(opt, cmp_scenarios, length, repetitions);
    } catch (const InfeasibleTaskError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        for (const auto& r : e.reasons()) std::cerr << "reason: " << r << "\n";
        return kExitInfeasible;
    } catch (const ConstraintUnsatisfiableError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        std::cerr << "reason: latency\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}
