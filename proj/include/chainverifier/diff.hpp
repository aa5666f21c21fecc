#pragma once

#include <Eigen/Dense>

#include <string_view>
#include <vector>

#include "chainverifier/core_model.hpp"

namespace chainverifier {

using Matrix = Eigen::MatrixXd;

enum class DerivativeRoute { kDual, kFiniteDifference };

std::string_view to_string(DerivativeRoute route);

struct DiffOptions {
  /// Differentiate even where model.smooth_at says no (F itself may still be
  /// C^1 there; only the control-set membership is ambiguous).
  bool allow_nonsmooth = false;
  /// Ignore step_dual and use central differences.
  bool force_finite_differences = false;
};

struct StepJacobians {
  Matrix dx;  // n x n, dF/dx
  Matrix dw;  // n x p, dF/dw
  DerivativeRoute route = DerivativeRoute::kDual;
};

/// Central-difference step for a coordinate of magnitude |c|.
double fd_step(double c);

StepJacobians step_jacobians(const ModelSpec& model, const StateVector& x, const ControlBlock& w,
                             const DiffOptions& opts = {});
Matrix jacobian_x(const ModelSpec& model, const StateVector& x, const ControlBlock& w,
                  const DiffOptions& opts = {});
Matrix jacobian_w(const ModelSpec& model, const StateVector& x, const ControlBlock& w,
                  const DiffOptions& opts = {});

/// Generalized controllability matrix C_x^k along a control sequence:
/// [A_{k-1}..A_1 B_0 | ... | A_{k-1} B_{k-2} | B_{k-1}], n x (p k).
struct ControllabilityMatrix {
  Matrix mat;
  StateVector base_point;
  ControlSequence sequence;
  DerivativeRoute route = DerivativeRoute::kDual;
};

ControllabilityMatrix controllability_matrix(const ModelSpec& model, const StateVector& x,
                                             const ControlSequence& ws,
                                             const DiffOptions& opts = {});

constexpr double kDefaultRankTolerance = 1e-8;

struct RankReport {
  std::vector<double> singular_values;  // nonincreasing
  int numeric_rank = 0;
  double tolerance = kDefaultRankTolerance;
  bool full_rank = false;  // numeric_rank == rows
  /// Some singular value ratio lies within two decades of the tolerance, so
  /// the decision is sensitive to the tolerance choice.
  bool borderline = false;
};

/// Counts singular values above rel_tol * sigma_max.
RankReport numeric_rank(const Matrix& mat, double rel_tol = kDefaultRankTolerance);

struct RankWitness {
  StateVector point;
  ControlSequence sequence;
  Matrix controllability;
  RankReport report;
  DerivativeRoute route = DerivativeRoute::kDual;
};

/// Rank of C_x^k(ws). Throws InvalidWitnessError when ws is not in O_x^k.
RankWitness assess_rank(const ModelSpec& model, const StateVector& x, const ControlSequence& ws,
                        double rel_tol = kDefaultRankTolerance);

bool rank_condition(const ModelSpec& model, const StateVector& x, const ControlSequence& ws,
                    double rel_tol = kDefaultRankTolerance);

}  // namespace chainverifier
