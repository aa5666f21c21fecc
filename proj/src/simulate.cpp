#include "chainverifier/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>

#include "chainverifier/errors.hpp"
#include "chainverifier/parallel.hpp"
#include "chainverifier/special_functions.hpp"

namespace chainverifier {

Trajectory run_chain(const ModelSpec& model, const StateVector& x0, int steps, std::uint64_t seed) {
  if (steps < 1) throw InputError("steps must be >= 1");
  check_state(model, x0);
  Rng rng = make_rng(seed);
  Trajectory traj;
  traj.seed = seed;
  traj.states.reserve(steps + 1);
  traj.controls.reserve(steps);
  traj.states.push_back(x0);
  for (int t = 0; t < steps; ++t) {
    ControlBlock w = model.sample_control(traj.states.back(), rng);
    StateVector next = model.step(traj.states.back(), w);
    if (!next.allFinite()) {
      throw NumericError("non-finite state at index " + std::to_string(t + 1));
    }
    traj.controls.push_back(std::move(w));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto n = traj.states.empty() ? 0 : traj.states.front().size();
  const auto p = traj.controls.empty() ? 0 : traj.controls.front().size();
  out << "index";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < p; ++i) out << ",w" << i;
  out << '\n';
  out.precision(17);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out << t;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << traj.states[t][i];
    for (Eigen::Index i = 0; i < p; ++i) {
      out << ',';
      if (t < traj.controls.size()) out << traj.controls[t][i];
    }
    out << '\n';
  }
}

double DensityCheckReport::max_l1() const {
  double m = 0.0;
  for (const auto& c : coordinates) m = std::max(m, c.l1);
  return m;
}

DensityCheckReport empirical_density_check(const ModelSpec& model, const StateVector& z,
                                           int samples, int bins, double lo, double hi,
                                           std::uint64_t seed, const DensityCheckOptions& opts) {
  if (samples < 10000) throw InputError("density check needs at least 1e4 samples");
  if (bins < 1 || !(hi > lo)) throw InputError("bad histogram range");
  check_state(model, z);
  const int p = model.p;
  const double width = (hi - lo) / bins;

  std::vector<std::vector<int>> counts(p, std::vector<int>(bins, 0));
  std::vector<int> outside(p, 0);
  Rng rng = make_rng(seed, {1});
  for (int s = 0; s < samples; ++s) {
    const ControlBlock w = model.sample_control(z, rng);
    for (int j = 0; j < p; ++j) {
      const double u = (w[j] - lo) / width;
      if (u >= 0.0 && u < bins) {
        ++counts[j][static_cast<int>(u)];
      } else {
        ++outside[j];
      }
    }
  }

  // Importance pool for marginals: other coordinates ~ N(0, 1).
  std::vector<Vector> pool;
  if (p >= 2) {
    Rng prng = make_rng(seed, {2});
    std::normal_distribution<double> normal;
    pool.reserve(opts.marginal_samples);
    for (int i = 0; i < opts.marginal_samples; ++i) {
      Vector v(p);
      for (int j = 0; j < p; ++j) v[j] = normal(prng);
      pool.push_back(std::move(v));
    }
  }

  DensityCheckReport report;
  report.state = z;
  report.samples = samples;
  report.lo = lo;
  report.hi = hi;
  report.seed = seed;
  for (int j = 0; j < p; ++j) {
    std::function<double(double)> marginal;
    if (p == 1) {
      marginal = [&](double t) { return std::exp(model.log_density(z, Vector::Constant(1, t))); };
    } else {
      marginal = [&, j](double t) {
        double acc = 0.0;
        for (Vector w : pool) {
          w[j] = t;
          const double lw = model.log_density(z, w) - (normal_log_pdf(w) + 0.5 * kLogTwoPi + 0.5 * t * t);
          acc += std::exp(lw);
        }
        return acc / static_cast<double>(pool.size());
      };
    }
    CoordinateDensityCheck check;
    check.coordinate = j;
    check.marginal = p >= 2;
    check.outside = outside[j];
    // Simpson on each bin; neighbouring bins share their edge evaluations.
    const int intervals = p == 1 ? 4 : 2;
    const double h = width / intervals;
    std::vector<double> grid(static_cast<std::size_t>(bins) * intervals + 1);
    parallel_for(grid.size(), [&](std::size_t i) { grid[i] = marginal(lo + static_cast<double>(i) * h); });
    for (int b = 0; b < bins; ++b) {
      DensityBin bin;
      bin.lo = lo + b * width;
      bin.hi = bin.lo + width;
      bin.empirical = static_cast<double>(counts[j][b]) / samples;
      const double* g = grid.data() + static_cast<std::ptrdiff_t>(b) * intervals;
      double sum = g[0] + g[intervals];
      for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * g[i];
      bin.analytic = sum * h / 3.0;
      if (counts[j][b] == 0) {
        ++check.empty_bins;
      } else {
        check.l1 += std::abs(bin.empirical - bin.analytic);
      }
      check.bins.push_back(bin);
    }
    report.coordinates.push_back(std::move(check));
  }
  return report;
}

void write_histogram_csv(std::ostream& out, const DensityCheckReport& report) {
  out << "coordinate,bin_lo,bin_hi,empirical,analytic\n";
  out.precision(17);
  for (const auto& c : report.coordinates) {
    for (const auto& b : c.bins) {
      out << c.coordinate << ',' << b.lo << ',' << b.hi << ',' << b.empirical << ',' << b.analytic
          << '\n';
    }
  }
}

BatchMean batch_means(const std::vector<double>& x, int batches) {
  if (batches < 2) throw InputError("batch means needs at least 2 batches");
  const std::size_t size = x.size() / batches;
  if (size == 0) throw InputError("too few observations for batch means");
  const std::size_t start = x.size() - size * batches;
  std::vector<double> means(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    const auto first = x.begin() + static_cast<std::ptrdiff_t>(start + b * size);
    means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / size;
  }
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= batches - 1;
  return {mean, std::sqrt(var / batches)};
}

double RateEstimate::combined_se() const { return std::sqrt(se_a * se_a + se_b * se_b); }

bool RateEstimate::routes_agree(double sigmas) const {
  return std::abs(route_a - route_b) <= sigmas * combined_se();
}

namespace {

double log_step_change(const XnesParams& params, const Vector& selected) {
  const int n = params.n;
  double drift = 0.0;
  for (int i = 0; i < params.mu; ++i) {
    drift += params.weights[i] * (selected.segment(i * n, n).squaredNorm() - n);
  }
  return params.kappa_sigma / (2.0 * n) * drift;
}

}  // namespace

RateEstimate xnes_convergence_rate(const XnesParams& params, const Vector& x0, double sigma0,
                                   int iterations, int burn_in, std::uint64_t seed, int batches) {
  validate(params);
  if (!params.objective.scaling_invariant) {
    throw InputError("objective '" + params.objective.name +
                     "' is not flagged scaling-invariant about 0; the linear-rate identity "
                     "does not apply");
  }
  if (burn_in < 0 || iterations <= burn_in) throw InputError("need 0 <= burn_in < iterations");
  if (x0.size() != params.n) throw InputError("x0 has the wrong dimension");
  if (!(sigma0 > 0.0)) throw InputError("sigma0 must be positive");
  const int n = params.n;
  std::normal_distribution<double> normal;

  RateEstimate est;
  est.iterations = iterations;
  est.burn_in = burn_in;
  est.batches = batches;
  est.seed = seed;

  // Route A: (X, sigma) with X = exp(log_scale) * x_hat and sigma kept as
  // ln sigma. Ranking f(X + sigma U) equals ranking
  // f(x_hat + exp(ln sigma - log_scale) U) by scaling invariance.
  {
    Rng rng = make_rng(seed, {1});
    Vector x_hat = x0;
    double log_scale = 0.0;
    double log_sigma = std::log(sigma0);
    double log_sigma_burn = 0.0;
    double log_norm_burn = 0.0;
    std::vector<double> increments;
    increments.reserve(iterations - burn_in);
    std::vector<Vector> cand(params.lambda, Vector(n));
    for (int t = 0; t < iterations; ++t) {
      if (t == burn_in) {
        log_sigma_burn = log_sigma;
        log_norm_burn = log_scale + std::log(x_hat.norm());
      }
      for (auto& u : cand) {
        for (int j = 0; j < n; ++j) u[j] = normal(rng);
      }
      const double rel = std::exp(log_sigma - log_scale);
      std::vector<double> fv(params.lambda);
      for (int i = 0; i < params.lambda; ++i) fv[i] = params.objective(x_hat + rel * cand[i]);
      std::vector<int> order(params.lambda);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
      Vector move = Vector::Zero(n);
      double drift = 0.0;
      for (int i = 0; i < params.mu; ++i) {
        const Vector& u = cand[order[i]];
        move += params.weights[i] * u;
        drift += params.weights[i] * (u.squaredNorm() - n);
      }
      x_hat += rel * params.kappa_m * move;
      const double dlog = params.kappa_sigma / (2.0 * n) * drift;
      log_sigma += dlog;
      if (t >= burn_in) increments.push_back(dlog);
      const double norm = x_hat.norm();
      if (norm > 0.0 && (norm > 1e50 || norm < 1e-50)) {
        log_scale += std::log(norm);
        x_hat /= norm;
      }
      if (!std::isfinite(log_sigma) || !x_hat.allFinite()) {
        throw NumericError("route A left the representable range at iteration " + std::to_string(t));
      }
    }
    const double span = iterations - burn_in;
    est.route_a = (log_sigma - log_sigma_burn) / span;
    est.se_a = batch_means(increments, batches).se;
    est.log_norm_rate = (log_scale + std::log(x_hat.norm()) - log_norm_burn) / span;
  }

  // Route B: the normalized chain Z alone.
  {
    Rng rng = make_rng(seed, {2});
    Vector z = x0 / sigma0;
    std::vector<double> terms;
    terms.reserve(iterations - burn_in);
    for (int t = 0; t < iterations; ++t) {
      const ControlBlock w = sample_xnes_control(params, z, rng);
      if (t >= burn_in) terms.push_back(log_step_change(params, w));
      const auto next = xnes_step<double>(params, {z.data(), static_cast<std::size_t>(n)},
                                          {w.data(), static_cast<std::size_t>(w.size())});
      z = Eigen::Map<const Vector>(next.data(), n);
      if (!z.allFinite()) throw NumericError("Z chain not finite at iteration " + std::to_string(t));
    }
    const auto bm = batch_means(terms, batches);
    est.route_b = std::accumulate(terms.begin(), terms.end(), 0.0) / terms.size();
    est.se_b = bm.se;
  }
  return est;
}

ReturnPeriods empirical_return_periods(const ModelSpec& model, const StateVector& x_star,
                                       double epsilon, int steps, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  const auto traj = run_chain(model, x_star, steps, seed);
  ReturnPeriods out;
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    if ((traj.states[t] - x_star).norm() < epsilon) out.visit_times.push_back(static_cast<int>(t));
  }
  for (std::size_t i = 1; i < out.visit_times.size(); ++i) {
    out.gaps.push_back(out.visit_times[i] - out.visit_times[i - 1]);
  }
  for (int g : out.gaps) out.gcd = std::gcd(out.gcd, g);
  if (out.gaps.empty()) out.warnings.push_back("no return to the ball within the horizon");
  return out;
}

}  // namespace chainverifier
