#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pwsopt/convergence.hpp"
#include "pwsopt/filippov.hpp"
#include "pwsopt/hopper.hpp"
#include "pwsopt/optimizer.hpp"
#include "pwsopt/types.hpp"

namespace pwsopt {

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal that round-trips the value.
std::string format_double(double v);

/// CSV with header t,x_1,...,x_n,u_1,...,u_m,g,mode. Each row carries the
/// input held on the interval starting at that row; the last row repeats
/// the final interval.
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

nlohmann::json events_to_json(const std::vector<Event>& events);
nlohmann::json phases_to_json(const std::vector<Phase>& phases);
nlohmann::json audit_to_json(const DifferentiabilityReport& report);
nlohmann::json report_to_json(const OptimizationReport& report,
                              const nlohmann::json& config_echo);
std::string report_summary_text(const OptimizationReport& report);

nlohmann::json rate_study_to_json(const RateStudy& study);
std::string rate_study_to_csv(const RateStudy& study);
nlohmann::json boundedness_to_json(const BoundednessStudy& study);
std::string boundedness_to_csv(const std::vector<BoundednessRow>& rows);

}  // namespace pwsopt
