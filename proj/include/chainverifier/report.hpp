#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainverifier/attractivity.hpp"
#include "chainverifier/config.hpp"
#include "chainverifier/diff.hpp"
#include "chainverifier/simulate.hpp"

namespace chainverifier {

inline constexpr const char* kToolVersion = "0.1.0";

struct PathQueryResult {
  PathQuery query;
  std::optional<PathCertificate> certificate;
};

struct DensityVerdict {
  DensityCheckReport check;
  double threshold = 0.0;
  bool passed = false;
};

struct RateVerdict {
  RateEstimate estimate;
  double agreement_sigmas = 4.0;
  bool routes_agree = false;
  std::string sign;  // "convergence", "divergence" or "indeterminate" (|route_a| within the band)
  std::string estimator_note;
};

/// Everything a subcommand produced. Field names are the JSON keys.
struct VerdictReport {
  std::string tool_version{kToolVersion};
  std::string command;
  RunConfig config;
  std::optional<StabilityVerdict> verdict;
  std::vector<RankReport> rank_attempts;
  std::optional<ReturnPeriods> empirical_returns;
  std::vector<DensityVerdict> density;
  std::optional<RateVerdict> rate;
  std::vector<PathQueryResult> paths;
  std::vector<std::string> diagnostics;
  double wall_clock_seconds = 0.0;
};

void to_json(nlohmann::json& j, const RunConfig& v);
void from_json(const nlohmann::json& j, RunConfig& v);
void to_json(nlohmann::json& j, const RankReport& v);
void from_json(const nlohmann::json& j, RankReport& v);
void to_json(nlohmann::json& j, const RankWitness& v);
void from_json(const nlohmann::json& j, RankWitness& v);
void to_json(nlohmann::json& j, const PathCertificate& v);
void from_json(const nlohmann::json& j, PathCertificate& v);
void to_json(nlohmann::json& j, const AttractivityCertificate& v);
void from_json(const nlohmann::json& j, AttractivityCertificate& v);
void to_json(nlohmann::json& j, const ReturnLengthSet& v);
void from_json(const nlohmann::json& j, ReturnLengthSet& v);
void to_json(nlohmann::json& j, const StabilityVerdict& v);
void from_json(const nlohmann::json& j, StabilityVerdict& v);
void to_json(nlohmann::json& j, const DensityCheckReport& v);
void from_json(const nlohmann::json& j, DensityCheckReport& v);
void to_json(nlohmann::json& j, const RateEstimate& v);
void from_json(const nlohmann::json& j, RateEstimate& v);
void to_json(nlohmann::json& j, const ReturnPeriods& v);
void from_json(const nlohmann::json& j, ReturnPeriods& v);
void to_json(nlohmann::json& j, const VerdictReport& v);
void from_json(const nlohmann::json& j, VerdictReport& v);

/// Pretty-printed JSON, newline terminated.
std::string dump_report(const VerdictReport& report);
VerdictReport parse_report(const std::string& text);

}  // namespace chainverifier
