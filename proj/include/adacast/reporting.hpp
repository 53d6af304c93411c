#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adacast/scheduler.hpp"
#include "adacast/simulator.hpp"

namespace adacast {

/// Shortest round-trippable decimal form of a double ("%.17g" with a
/// fixed C locale), so CSV consumers can reproduce summary statistics
/// bit-exactly.
std::string format_double(double value);

/// Telemetry / deployment wire messages (single-line JSON, documented in
/// the README). The same strings appear in the event-log detail column.
std::string telemetry_message(const NodeTelemetry& telemetry);
NodeTelemetry parse_telemetry_message(const std::string& text);
std::string deployment_message(const SpDeployment& deployment, long inference_count);
SpDeployment parse_deployment_message(const std::string& text);

void write_records_csv(std::ostream& out, const SimulationRun& run);
void write_events_csv(std::ostream& out, const SimulationRun& run);

std::string records_csv(const SimulationRun& run);
std::string events_csv(const SimulationRun& run);

std::string summary_json(const RunSummary& summary);

/// Recomputes the latency/energy/accuracy summary from a records CSV, as
/// an external consumer would. Matches the in-process summary exactly.
RunSummary summary_from_records_csv(const std::string& csv, int num_classes);

std::string decision_json(const SchedulingDecision& decision, const TaskProfiles& profiles,
                          const NodeConstraints& constraints);

void write_pareto_csv(std::ostream& out, const std::vector<ParetoPoint>& points,
                      const TaskProfiles& profiles);
std::string pareto_csv(const std::vector<ParetoPoint>& points, const TaskProfiles& profiles);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

/// FNV-1a over a byte string; used for output-stability checks.
std::uint64_t fnv1a(const std::string& bytes);

} // namespace adacast
