#include "chainverifier/objectives.hpp"

#include <cmath>
#include <random>

#include "chainverifier/errors.hpp"
#include "chainverifier/rng.hpp"

namespace chainverifier {

std::vector<std::string> objective_names() {
  return {"sphere", "ellipsoid", "linear", "l1", "radial-sin", "bumpy"};
}

Objective make_objective(std::string_view name, int n) {
  if (n < 1) throw InputError("objective dimension must be positive");
  Objective obj;
  obj.name = std::string(name);
  if (name == "sphere") {
    obj.f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    obj.scaling_invariant = true;
    obj.sphere = true;
  } else if (name == "ellipsoid") {
    Eigen::VectorXd scale(n);
    for (int i = 0; i < n; ++i) scale[i] = n == 1 ? 1.0 : std::pow(100.0, double(i) / (n - 1));
    obj.f = [scale](const Eigen::VectorXd& x) { return x.cwiseAbs2().dot(scale); };
    obj.scaling_invariant = true;
  } else if (name == "linear") {
    obj.f = [](const Eigen::VectorXd& x) { return x[0]; };
    obj.scaling_invariant = true;
  } else if (name == "l1") {
    obj.f = [](const Eigen::VectorXd& x) { return x.lpNorm<1>(); };
    obj.scaling_invariant = true;
  } else if (name == "radial-sin") {
    // r + sin r is nondecreasing in r, so this is a monotone transform of the norm.
    obj.f = [](const Eigen::VectorXd& x) {
      const double r = x.norm();
      return r + std::sin(r);
    };
    obj.scaling_invariant = true;
  } else if (name == "bumpy") {
    obj.f = [](const Eigen::VectorXd& x) {
      const double r = x.norm();
      return r + 2.0 * std::sin(r);
    };
    obj.scaling_invariant = false;
  } else {
    throw InputError("unknown objective '" + std::string(name) + "'");
  }
  return obj;
}

ScalingCheck check_scaling_invariance(const Objective& f, const Eigen::VectorXd& x_star,
                                      int trials, std::uint64_t seed, double rho_lo,
                                      double rho_hi) {
  if (trials < 1) throw InputError("trials must be >= 1");
  if (!(rho_lo > 0.0) || rho_hi < rho_lo) throw InputError("need 0 < rho_lo <= rho_hi");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto n = x_star.size();
  const double log_lo = std::log(rho_lo);
  const double log_hi = std::log(rho_hi);

  ScalingCheck out;
  out.trials = trials;
  for (int t = 0; t < trials; ++t) {
    // Spread the pair over several length scales.
    const double scale = std::exp(std::log(1e-2) + unif(rng) * std::log(1e4));
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = x_star[i] + scale * normal(rng);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = x_star[i] + scale * normal(rng);
    const double rho = rho_lo == rho_hi ? rho_lo : std::exp(log_lo + unif(rng) * (log_hi - log_lo));
    const bool before = f(x) <= f(y);
    const bool after = f(x_star + rho * (x - x_star)) <= f(x_star + rho * (y - x_star));
    if (before != after) {
      ++out.violations;
      if (out.counterexamples.size() < 8) out.counterexamples.push_back({x, y, rho});
    }
  }
  out.passed = out.violations == 0;
  return out;
}

}  // namespace chainverifier
