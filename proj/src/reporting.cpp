#include "adacast/reporting.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace adacast {

namespace {

using nlohmann::json;

std::string join_ids(const std::vector<PredictorId>& ids, char sep = ';') {
    std::string s;
    for (const auto& id : ids) {
        if (!s.empty()) s += sep;
        s += id;
    }
    return s;
}

std::string join_doubles(const std::vector<double>& values, char sep = ';') {
    std::string s;
    for (double v : values) {
        if (!s.empty()) s += sep;
        s += format_double(v);
    }
    return s;
}

std::string join_mask(const std::vector<bool>& mask) {
    std::string s;
    for (bool b : mask) s += b ? '1' : '0';
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string telemetry_message(const NodeTelemetry& t) {
    json j;
    j["type"] = "telemetry";
    j["inference"] = t.inference_count;
    j["ema"] = t.ema;
    j["battery"] = t.battery_level;
    j["temperature_c"] = t.temperature_c;
    j["deadline_misses"] = t.deadline_misses;
    j["enabled_sps"] = t.enabled_sps;
    j["stored_sps"] = t.stored_sps;
    return j.dump();
}

NodeTelemetry parse_telemetry_message(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("type") != "telemetry") throw InputError("not a telemetry message");
    NodeTelemetry t;
    t.inference_count = j.at("inference").get<long>();
    t.ema = j.at("ema").get<std::vector<double>>();
    for (double v : t.ema)
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("telemetry ema entry outside [0,1]");
    t.battery_level = j.at("battery").get<double>();
    t.temperature_c = j.at("temperature_c").get<double>();
    t.deadline_misses = j.at("deadline_misses").get<long>();
    t.enabled_sps = j.at("enabled_sps").get<std::vector<PredictorId>>();
    t.stored_sps = j.at("stored_sps").get<std::vector<PredictorId>>();
    return t;
}

std::string deployment_message(const SpDeployment& deployment, long inference_count) {
    json j;
    j["type"] = "deployment";
    j["inference"] = inference_count;
    j["sp"] = deployment.sp;
    return j.dump();
}

SpDeployment parse_deployment_message(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("type") != "deployment") throw InputError("not a deployment message");
    return SpDeployment{j.at("sp").get<PredictorId>()};
}

void write_records_csv(std::ostream& out, const SimulationRun& run) {
    out << "index,true_class,predicted,exit,exit_position,executed,macs,latency_ms,energy_mj,"
           "deadline_miss,cpu_scale,battery,order,enabled,ema\n";
    for (const auto& r : run.records) {
        out << r.index << ',' << r.true_class << ',' << r.outcome.predicted << ','
            << to_string(r.outcome.exit.kind) << ',' << r.outcome.exit.position << ','
            << join_ids(r.outcome.executed) << ',' << format_double(r.outcome.macs) << ','
            << format_double(r.outcome.latency_ms) << ',' << format_double(r.outcome.energy_mj)
            << ',' << (r.deadline_miss ? 1 : 0) << ',' << format_double(r.cpu_scale) << ','
            << format_double(r.battery) << ',' << join_ids(r.order) << ',' << join_mask(r.enabled)
            << ',' << join_doubles(r.ema) << '\n';
    }
}

void write_events_csv(std::ostream& out, const SimulationRun& run) {
    out << "inference,source,action,sp,detail,ema\n";
    for (const auto& e : run.events) {
        std::string detail = e.detail;
        for (char& ch : detail)
            if (ch == ',') ch = ';';
        out << e.inference << ',' << e.source << ',' << e.action << ',' << e.sp << ',' << detail
            << ',' << join_doubles(e.ema) << '\n';
    }
}

std::string records_csv(const SimulationRun& run) {
    std::ostringstream out;
    write_records_csv(out, run);
    return out.str();
}

std::string events_csv(const SimulationRun& run) {
    std::ostringstream out;
    write_events_csv(out, run);
    return out.str();
}

std::string summary_json(const RunSummary& s) {
    json j;
    j["inferences"] = s.inferences;
    j["mean_latency_ms"] = s.mean_latency_ms;
    j["p50_latency_ms"] = s.p50_latency_ms;
    j["p95_latency_ms"] = s.p95_latency_ms;
    j["p99_latency_ms"] = s.p99_latency_ms;
    j["mean_energy_mj"] = s.mean_energy_mj;
    j["mean_macs"] = s.mean_macs;
    j["balanced_accuracy"] = s.balanced_accuracy;
    j["plain_accuracy"] = s.plain_accuracy;
    j["deadline_misses"] = s.deadline_misses;
    j["final_battery"] = s.final_battery;
    j["lc_actions"] = s.lc_actions;
    j["gc_deployments"] = s.gc_deployments;
    return j.dump(2);
}

RunSummary summary_from_records_csv(const std::string& csv, int num_classes) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);   // header
    std::vector<StepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        StepRecord r;
        r.index = std::stol(cols[0]);
        r.true_class = std::stoi(cols[1]);
        r.outcome.predicted = std::stoi(cols[2]);
        r.outcome.macs = std::stod(cols[6]);
        r.outcome.latency_ms = std::stod(cols[7]);
        r.outcome.energy_mj = std::stod(cols[8]);
        r.deadline_miss = cols[9] == "1";
        r.cpu_scale = std::stod(cols[10]);
        r.battery = std::stod(cols[11]);
        records.push_back(std::move(r));
    }
    return summarize(records, {}, num_classes);
}

std::string decision_json(const SchedulingDecision& d, const TaskProfiles& profiles,
                          const NodeConstraints& constraints) {
    json j;
    j["task"] = profiles.task();
    j["order"] = d.config.ordered_sps;
    json targets = json::array();
    for (const auto& id : d.config.ordered_sps) targets.push_back(profiles.by_id(id).target);
    j["order_targets"] = targets;
    j["fallback"] = d.config.fb;
    j["thr_minus"] = d.config.thr_minus;
    j["thr_plus"] = d.config.thr_plus;
    j["expected"] = {{"macs", d.expected.macs},
                     {"latency_ms", d.expected.latency_ms},
                     {"energy_mj", d.expected.energy_mj}};
    j["expected_balanced_accuracy"] = d.expected_balanced_accuracy;
    j["expected_plain_accuracy"] = d.expected_plain_accuracy;
    j["audit"] = {{"feasible", d.audit.feasible},
                  {"accuracy_drop", d.audit.accuracy_drop},
                  {"memory_bytes", d.audit.memory_bytes},
                  {"worst_case_latency_ms", d.audit.worst_case_latency_ms},
                  {"violations", d.audit.violations}};
    j["constraints"] = {{"memory_budget_bytes", constraints.memory_budget_bytes},
                        {"deadline_ms", constraints.deadline_ms},
                        {"t_lc_ms", constraints.t_lc_ms}};
    return j.dump(2);
}

void write_pareto_csv(std::ostream& out, const std::vector<ParetoPoint>& points,
                      const TaskProfiles& profiles) {
    const double fb_macs = profiles.fallback().macs;
    out << "drop_budget,feasible,expected_macs,mac_reduction,expected_balanced_accuracy,order\n";
    for (const auto& p : points) {
        out << format_double(p.drop_budget) << ',';
        if (p.decision) {
            const auto& d = *p.decision;
            out << 1 << ',' << format_double(d.expected.macs) << ','
                << format_double(1.0 - d.expected.macs / fb_macs) << ','
                << format_double(d.expected_balanced_accuracy) << ','
                << join_ids(d.config.ordered_sps) << '\n';
        } else {
            out << 0 << ",,,," << join_ids({}) << '\n';
        }
    }
}

std::string pareto_csv(const std::vector<ParetoPoint>& points, const TaskProfiles& profiles) {
    std::ostringstream out;
    write_pareto_csv(out, points, profiles);
    return out.str();
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << "scenario,mode,mean_latency_ms,p95_latency_ms,mean_energy_mj,mean_macs,"
           "balanced_accuracy,plain_accuracy,deadline_misses,gc_deployments\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << to_string(r.mode) << ','
            << format_double(r.summary.mean_latency_ms) << ','
            << format_double(r.summary.p95_latency_ms) << ','
            << format_double(r.summary.mean_energy_mj) << ',' << format_double(r.summary.mean_macs)
            << ',' << format_double(r.summary.balanced_accuracy) << ','
            << format_double(r.summary.plain_accuracy) << ',' << r.summary.deadline_misses << ','
            << r.summary.gc_deployments << '\n';
    }
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    write_comparison_csv(out, rows);
    return out.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace adacast
