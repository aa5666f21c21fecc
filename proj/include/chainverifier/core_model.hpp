#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainverifier/dual.hpp"
#include "chainverifier/rng.hpp"

namespace chainverifier {

using Vector = Eigen::VectorXd;
using StateVector = Eigen::VectorXd;   // length n
using ControlBlock = Eigen::VectorXd;  // length p

/// An ordered list of k >= 1 control blocks of equal dimension p.
class ControlSequence {
 public:
  ControlSequence() = default;
  explicit ControlSequence(std::vector<ControlBlock> blocks);

  /// Splits a flat vector of length p*k into k blocks.
  static ControlSequence from_flat(const Vector& flat, int p);

  int length() const { return static_cast<int>(blocks_.size()); }
  bool empty() const { return blocks_.empty(); }
  int block_dim() const { return blocks_.empty() ? 0 : static_cast<int>(blocks_.front().size()); }

  const ControlBlock& operator[](std::size_t i) const { return blocks_[i]; }
  ControlBlock& operator[](std::size_t i) { return blocks_[i]; }
  const std::vector<ControlBlock>& blocks() const { return blocks_; }

  void push_back(ControlBlock w);
  Vector flatten() const;

  /// Blocks [first, first + count).
  ControlSequence slice(int first, int count) const;

  auto begin() const { return blocks_.begin(); }
  auto end() const { return blocks_.end(); }

 private:
  std::vector<ControlBlock> blocks_;
};

using StepFn = std::function<Vector(const Vector& x, const Vector& w)>;
using DualStepFn =
    std::function<std::vector<Dual>(std::span<const Dual> x, std::span<const Dual> w)>;
using SamplerFn = std::function<ControlBlock(const StateVector& x, Rng& rng)>;
using PointFn = std::function<double(const StateVector& x, const ControlBlock& w)>;
using PointPredicate = std::function<bool(const StateVector& x, const ControlBlock& w)>;
using PathHintFn = std::function<std::optional<ControlSequence>(
    const StateVector& y, const StateVector& center, double radius, int k)>;

/// A chain Phi_{k+1} = F(Phi_k, alpha(Phi_k, U_{k+1})) described through its
/// step map F, a sampler for alpha(x, U), and a density of alpha(x, U).
///
/// All callables must be pure (thread-safe, deterministic); randomness enters
/// only through the Rng passed to sample_control.
struct ModelSpec {
  std::string name;
  int n = 0;  // state dimension
  int p = 0;  // control block dimension
  int m = 0;  // raw noise dimension

  StepFn step;
  /// Optional generic-scalar copy of step, used for exact Jacobians.
  DualStepFn step_dual;
  SamplerFn sample_control;
  /// Natural log of the chosen density representative p_x(w); -inf where 0.
  PointFn log_density;
  double density_positivity_threshold = 0.0;

  /// Optional: for densities with a Monte-Carlo factor, true only where the
  /// estimate is positive by a margin of several standard errors.
  PointPredicate confident_support;
  /// Optional: false where step must not be differentiated.
  PointPredicate smooth_at;
  /// Optional analytic path constructor; may return nullopt.
  PathHintFn path_hint;
};

void check_state(const ModelSpec& model, const StateVector& x);
void check_block(const ModelSpec& model, const ControlBlock& w);
void check_sequence(const ModelSpec& model, const ControlSequence& ws);

StateVector step(const ModelSpec& model, const StateVector& x, const ControlBlock& w);

/// S_x^0 = x.
StateVector extended_transition(const ModelSpec& model, const StateVector& x);
/// S_x^k(w_1..w_k) as a left fold of step.
StateVector extended_transition(const ModelSpec& model, const StateVector& x,
                                const ControlSequence& ws);
/// S_x^0 .. S_x^k along ws (k + 1 states).
std::vector<StateVector> visited_states(const ModelSpec& model, const StateVector& x,
                                        const ControlSequence& ws);

double density(const ModelSpec& model, const StateVector& x, const ControlBlock& w);

/// ln p_x^k(ws); -inf as soon as one factor vanishes.
double extended_log_density(const ModelSpec& model, const StateVector& x,
                            const ControlSequence& ws);
double extended_density(const ModelSpec& model, const StateVector& x,
                        const ControlSequence& ws);

/// ws in O_x^k, i.e. p_x^k(ws) > density_positivity_threshold (decided in log
/// space so long or large-norm sequences do not underflow).
bool in_control_set(const ModelSpec& model, const StateVector& x, const ControlSequence& ws);

/// ws is a k-steps path from y into the open ball B(center, radius).
bool is_path(const ModelSpec& model, const StateVector& y, const ControlSequence& ws,
             const StateVector& center, double radius);

}  // namespace chainverifier
