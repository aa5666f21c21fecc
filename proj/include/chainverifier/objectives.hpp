#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace chainverifier {

/// Objective f: R^n -> R plus the hypotheses the user asserts about it.
struct Objective {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> f;
  bool negligible_levels = true;
  bool scaling_invariant = false;  // with respect to the origin
  /// f is a monotone transform of the squared Euclidean norm, so
  /// P(f(z + N) <= f(z + w)) has a closed form.
  bool sphere = false;

  double operator()(const Eigen::VectorXd& x) const { return f(x); }
};

/// Built-ins: sphere, ellipsoid, linear, l1, radial-sin (|x| + sin|x|),
/// bumpy (|x| + 2 sin|x|).
Objective make_objective(std::string_view name, int n);
std::vector<std::string> objective_names();

struct ScalingCounterexample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double rho = 1.0;
};

struct ScalingCheck {
  bool passed = true;
  int trials = 0;
  int violations = 0;
  std::vector<ScalingCounterexample> counterexamples;  // first few only
};

/// Random search for (x, y, rho) breaking
///   f(x) <= f(y)  <=>  f(x* + rho (x - x*)) <= f(x* + rho (y - x*)).
/// rho is drawn log-uniformly from [rho_lo, rho_hi].
ScalingCheck check_scaling_invariance(const Objective& f, const Eigen::VectorXd& x_star,
                                      int trials, std::uint64_t seed, double rho_lo = 1e-3,
                                      double rho_hi = 1e3);

}  // namespace chainverifier
