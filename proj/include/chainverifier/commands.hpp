#pragma once

#include <functional>
#include <optional>
#include <string>

#include "chainverifier/config.hpp"
#include "chainverifier/report.hpp"

namespace chainverifier {

/// Progress sink for diagnostics (stderr in the CLI); may be empty.
using Logger = std::function<void(const std::string&)>;

struct CommandResult {
  VerdictReport report;
  int exit_code = 0;
};

/// Rank condition at x*, global and steady attraction, return lengths and the
/// combined verdict. Exit 0 when conclusive, 2 when inconclusive.
CommandResult cmd_analyze(const RunConfig& cfg, const Logger& log = {});

/// Density oracle at each configured state. Exit 0 iff every L1 distance is
/// within the threshold, 2 otherwise.
CommandResult cmd_check_density(const RunConfig& cfg, const Logger& log = {});

/// Two-route rate estimate. Exit 0 when the routes agree, 2 otherwise.
/// Objectives not flagged scaling-invariant raise InputError.
CommandResult cmd_rate(const RunConfig& cfg, const Logger& log = {});

/// find_path for each [path.N] query. Always exit 0.
CommandResult cmd_paths(const RunConfig& cfg, const Logger& log = {});

/// Best rank witness at x: sampled sequences of length 1..k_max, `attempts`
/// draws per length; stops at the first full-rank witness. Every assessed
/// report is appended to `attempts_out` when given.
std::optional<RankWitness> search_rank_witness(const ModelSpec& model, const StateVector& x,
                                               int k_max, int attempts, double rel_tol,
                                               std::uint64_t seed,
                                               std::vector<RankReport>* attempts_out = nullptr,
                                               std::vector<std::string>* notes = nullptr);

}  // namespace chainverifier
