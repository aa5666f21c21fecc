#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chainverifier/attractivity.hpp"
#include "chainverifier/core_model.hpp"
#include "chainverifier/models.hpp"

namespace chainverifier {

struct ModelConfig {
  std::string kind = "random-walk";  // random-walk | selection-walk | xnes | toy
  int n = 1;
  std::string objective = "sphere";
  // xnes
  int lambda = 2;
  int mu = 1;
  std::vector<double> weights;  // empty: equal weights
  double kappa_m = 1.0;
  double kappa_sigma = 1.0;
  // Monte-Carlo Q for objectives without a closed form
  int q_samples = kDefaultQSamples;
  std::optional<std::uint64_t> q_seed;  // derived from the run seed when unset
  // toy
  std::string toy = "control-ignoring";  // control-ignoring | period-two | drift | flip
  double toy_scale = 0.01;
};

struct AnalysisConfig {
  std::optional<Vector> x_star;  // defaults to the origin
  double epsilon = 0.1;
  int k_max = 2;
  int first_length = 1;  // T
  int span = 8;
  double rank_tol = 1e-8;
  int rank_k_max = 3;
  int rank_attempts = 8;
  double origin_lo = -5.0;
  double origin_hi = 5.0;
  int origin_count = 32;
  std::vector<Vector> extra_origins;
  std::optional<double> epsilon_return;  // defaults to epsilon / 10
  int return_k_max = 6;
  double fixed_point_tol = 0.0;  // > 0 enables the fixed-point route to steady attraction
  int empirical_return_steps = 0;
};

struct SearchConfig {
  int restarts = 64;
  int iterations = 200;
  double shrink = 0.5;
  double initial_step = 1.0;
  bool use_hints = true;
};

struct DensityConfig {
  std::vector<Vector> states;  // defaults to the origin
  int samples = 100000;
  int bins = 80;
  double lo = -4.0;
  double hi = 4.0;
  double threshold = 0.05;
  int marginal_samples = 4000;
};

struct RateConfig {
  std::optional<Vector> x0;  // defaults to e_1
  double sigma0 = 1.0;
  int iterations = 20000;
  int burn_in = -1;  // -1: 20% of iterations
  int batches = 20;
  double agreement_sigmas = 4.0;
  int trajectory_steps = 0;
};

struct PathQuery {
  Vector y;
  Vector center;
  double radius = 0.1;
  int k = 1;
};

struct RunConfig {
  std::uint64_t seed = 0;
  ModelConfig model;
  AnalysisConfig analysis;
  SearchConfig search;
  DensityConfig density;
  RateConfig rate;
  std::vector<PathQuery> paths;
};

/// Parses an INI document. Every key is validated before returning; unknown
/// sections or keys and a missing [run] seed raise ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Checks cross-field constraints (dimensions, ranges); throws ConfigError.
void validate_config(const RunConfig& cfg);

/// Stream seeds derived from the run seed.
enum class SeedStream : std::uint64_t {
  kSearch = 10,
  kDensity = 11,
  kRate = 12,
  kEmpiricalReturns = 13,
  kRankWitness = 14,
  kQPool = 15,
};
std::uint64_t stream_seed(const RunConfig& cfg, SeedStream stream);

XnesParams xnes_params_from(const RunConfig& cfg);
ModelSpec build_model(const RunConfig& cfg);
SearchBudget search_budget(const RunConfig& cfg);
StateVector resolved_x_star(const RunConfig& cfg);
double resolved_epsilon_return(const RunConfig& cfg);

}  // namespace chainverifier
