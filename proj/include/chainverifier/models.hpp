#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "chainverifier/core_model.hpp"
#include "chainverifier/objectives.hpp"

namespace chainverifier {

inline constexpr int kDefaultQSamples = 20000;
inline constexpr std::uint64_t kDefaultQSeed = 0x51a7e5eedULL;

// ---------------------------------------------------------------------------
// Additive random walk: F(x, w) = x + w, w ~ N(0, I_n).

ModelSpec make_random_walk(int n = 1);

// ---------------------------------------------------------------------------
// Selection walk on R: two candidates x + u^1, x + u^2, keep the better one.
// alpha(x, (u1, u2)) = (u1 - u2) 1{f(x+u1) <= f(x+u2)} + u2, F(x, w) = x + w,
// p_x(w) = 2 p_N(w) P(f(x + w) < f(x + U)).

struct SelectionWalkOptions {
  int q_samples = kDefaultQSamples;  // used when f has no closed form
  std::uint64_t q_seed = kDefaultQSeed;
  double support_sigmas = 3.0;
};

ModelSpec make_selection_walk(const Objective& f, const SelectionWalkOptions& opts = {});

/// ln p_x(w) for the selection walk with f(x) = x^2, in closed form.
double selection_walk_sphere_log_density(double x, double w);

// ---------------------------------------------------------------------------
// xNES normalized chain Z_{k+1} = F_xNES(Z_k, W_{k+1}).

struct XnesParams {
  int n = 1;
  int lambda = 2;
  int mu = 1;
  std::vector<double> weights{1.0};  // beta_1..beta_mu, sum 1
  double kappa_m = 1.0;
  double kappa_sigma = 1.0;
  Objective objective;
  int q_samples = kDefaultQSamples;
  std::uint64_t q_seed = kDefaultQSeed;
  double support_sigmas = 3.0;
};

/// Equal weights 1/mu.
XnesParams xnes_params(int n, int lambda, int mu, const Objective& f, double kappa_m = 1.0,
                       double kappa_sigma = 1.0);

/// Throws InputError when the parameter invariants fail.
void validate(const XnesParams& params);

/// F_xNES(z, w) = (z + k_m sum b_i w^i) / exp(k_s/(2n) sum b_i (|w^i|^2 - n)).
template <class S>
std::vector<S> xnes_step(const XnesParams& params, std::span<const S> z, std::span<const S> w) {
  using std::exp;
  const int n = params.n;
  std::vector<S> num(z.begin(), z.end());
  S drift = S(0.0);
  for (int i = 0; i < params.mu; ++i) {
    const double beta = params.weights[i];
    S sq = S(0.0);
    for (int j = 0; j < n; ++j) {
      const S wij = w[static_cast<std::size_t>(i) * n + j];
      num[j] += params.kappa_m * beta * wij;
      sq += wij * wij;
    }
    drift += beta * (sq - double(n));
  }
  const S denom = exp(drift * (params.kappa_sigma / (2.0 * n)));
  for (auto& v : num) v = v / denom;
  return num;
}

/// Ranking of lambda candidates z + u^i by f, ties broken by natural order.
struct SelectionOutcome {
  std::vector<int> permutation;  // 0-based S(1..lambda)
  ControlBlock selected;         // (u^{S(1)}, ..., u^{S(mu)}) flattened
};

SelectionOutcome select_steps(const Objective& f, const StateVector& z,
                              const std::vector<Vector>& candidates, int mu);

/// Estimate of Q_z^f(w) = P(f(z + N) <= f(z + w)).
struct QEstimate {
  double q = 0.0;
  double one_minus_q = 1.0;  // carried separately for tail accuracy
  double se = 0.0;
  bool exact = false;
};

/// Monte-Carlo Q with se = sqrt(q (1 - q) / samples).
QEstimate q_value(const Objective& f, const StateVector& z, const Vector& w, int samples,
                  std::uint64_t seed);

/// Exact Q for the sphere via the noncentral chi-squared distribution:
/// |z + N|^2 ~ chi'^2_n(|z|^2).
QEstimate q_exact_sphere(const StateVector& z, const Vector& w);

/// Evaluator for the density of the mu selected steps. Q uses the exact
/// sphere formula when the objective allows it, else a fixed pool of normal
/// draws (common random numbers, so the density stays deterministic).
class SelectionDensity {
 public:
  explicit SelectionDensity(XnesParams params);

  QEstimate q(const StateVector& z, const Vector& w_block) const;
  double log_density(const StateVector& z, const ControlBlock& w) const;
  double density(const StateVector& z, const ControlBlock& w) const;
  /// Strictly ordered and, for Monte-Carlo Q, 1 - Q clear of zero by
  /// support_sigmas standard errors of the factor it enters.
  bool confidently_positive(const StateVector& z, const ControlBlock& w) const;
  /// Pairwise distinct f-values among the selected blocks.
  bool untied(const StateVector& z, const ControlBlock& w) const;

  const XnesParams& params() const { return params_; }

 private:
  XnesParams params_;
  std::shared_ptr<const std::vector<Vector>> pool_;
};

double selection_log_density(const XnesParams& params, const StateVector& z,
                             const ControlBlock& w);
double selection_density(const XnesParams& params, const StateVector& z, const ControlBlock& w);

ModelSpec make_xnes_chain(const XnesParams& params);

/// Draws lambda standard normal candidates around z and returns the selected
/// mu blocks.
ControlBlock sample_xnes_control(const XnesParams& params, const StateVector& z, Rng& rng);

// ---------------------------------------------------------------------------
// Small models used as controls and counterexamples.

/// step(x, w) = x; the control is ignored. w ~ N(0, 1).
ModelSpec make_control_ignoring(int n = 1);
/// step(x, w) = -x + scale * w with density 1/2 on |w| < 1.
ModelSpec make_period_two(double scale = 0.01);
/// step(x, w) = x + 1 + 0 * w.
ModelSpec make_drift();
/// step(x, w) = -x, deterministic flip.
ModelSpec make_flip();

}  // namespace chainverifier
