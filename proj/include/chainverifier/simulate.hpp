#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chainverifier/core_model.hpp"
#include "chainverifier/models.hpp"

namespace chainverifier {

struct Trajectory {
  std::vector<StateVector> states;     // steps + 1 entries
  std::vector<ControlBlock> controls;  // steps entries
  std::uint64_t seed = 0;
};

/// Iterates sampler + step from x0. Throws NumericError naming the first
/// index whose state is not finite.
Trajectory run_chain(const ModelSpec& model, const StateVector& x0, int steps, std::uint64_t seed);

/// One row per step: index, state coordinates, control coordinates (the
/// control applied from that state; empty on the final row).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

struct DensityBin {
  double lo = 0.0;
  double hi = 0.0;
  double empirical = 0.0;  // fraction of samples in the bin
  double analytic = 0.0;   // bin-integrated density
};

struct CoordinateDensityCheck {
  int coordinate = 0;
  bool marginal = false;  // compared against a Monte-Carlo marginal
  double l1 = 0.0;        // sum over non-empty bins of |empirical - analytic|
  int empty_bins = 0;
  int outside = 0;        // samples outside [lo, hi]
  std::vector<DensityBin> bins;
};

struct DensityCheckReport {
  StateVector state;
  int samples = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t seed = 0;
  std::vector<CoordinateDensityCheck> coordinates;

  double max_l1() const;
};

struct DensityCheckOptions {
  int marginal_samples = 4000;  // importance samples for marginal densities
};

/// Histogram of sampled controls at state z against the model density,
/// integrated per bin (composite Simpson). For p = 1 the density is used directly;
/// for p >= 2 each coordinate's marginal is compared with the density
/// marginalized by importance sampling from standard normal coordinates.
DensityCheckReport empirical_density_check(const ModelSpec& model, const StateVector& z,
                                           int samples, int bins, double lo, double hi,
                                           std::uint64_t seed,
                                           const DensityCheckOptions& opts = {});

void write_histogram_csv(std::ostream& out, const DensityCheckReport& report);

/// Batch-means estimate: mean of x and its standard error from `batches`
/// equal batches (leading remainder dropped).
struct BatchMean {
  double mean = 0.0;
  double se = 0.0;
};
BatchMean batch_means(const std::vector<double>& x, int batches);

struct RateEstimate {
  /// (1/(k - b)) ln(sigma_k / sigma_b) from the (X, sigma) chain.
  double route_a = 0.0;
  double se_a = 0.0;
  /// Occupation average of (k_s/(2n)) sum b_i (|W^i|^2 - n) along the Z chain.
  double route_b = 0.0;
  double se_b = 0.0;
  /// (1/(k - b)) ln(|X_k| / |X_b|) from the route-A run.
  double log_norm_rate = 0.0;
  int iterations = 0;
  int burn_in = 0;
  int batches = 20;
  std::uint64_t seed = 0;

  double combined_se() const;
  /// |route_a - route_b| <= sigmas * combined_se().
  bool routes_agree(double sigmas = 4.0) const;
};

/// Two independent estimates of the linear rate of xNES on a scaling-
/// invariant objective. Route A and route B use streams derived from `seed`
/// ({1} and {2}), so their agreement is a real consistency check.
RateEstimate xnes_convergence_rate(const XnesParams& params, const Vector& x0, double sigma0,
                                   int iterations, int burn_in, std::uint64_t seed,
                                   int batches = 20);

struct ReturnPeriods {
  std::vector<int> visit_times;
  std::vector<int> gaps;
  int gcd = 0;
  std::vector<std::string> warnings;
};

/// Runs the chain from x_star and records the gaps between successive visits
/// to B(x_star, epsilon).
ReturnPeriods empirical_return_periods(const ModelSpec& model, const StateVector& x_star,
                                       double epsilon, int steps, std::uint64_t seed);

}  // namespace chainverifier
