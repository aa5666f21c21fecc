#include "chainverifier/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "chainverifier/errors.hpp"
#include "chainverifier/special_functions.hpp"

namespace chainverifier {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vector draw_normal(int dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector u(dim);
  for (int i = 0; i < dim; ++i) u[i] = normal(rng);
  return u;
}

std::shared_ptr<const std::vector<Vector>> normal_pool(int dim, int count, std::uint64_t seed) {
  Rng rng = make_rng(seed, {static_cast<std::uint64_t>(dim)});
  auto pool = std::make_shared<std::vector<Vector>>();
  pool->reserve(count);
  for (int i = 0; i < count; ++i) pool->push_back(draw_normal(dim, rng));
  return pool;
}

/// (0, ..., 0, center - y): hits center exactly for additive steps.
PathHintFn additive_hint(int n) {
  return [n](const StateVector& y, const StateVector& center, double,
             int k) -> std::optional<ControlSequence> {
    if (k < 1) return std::nullopt;
    ControlSequence ws;
    for (int i = 0; i + 1 < k; ++i) ws.push_back(Vector::Zero(n));
    ws.push_back(center - y);
    return ws;
  };
}

template <class S>
std::vector<S> add_step(std::span<const S> x, std::span<const S> w) {
  std::vector<S> out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[i];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ModelSpec make_random_walk(int n) {
  if (n < 1) throw InputError("random walk dimension must be >= 1");
  ModelSpec m;
  m.name = "random-walk";
  m.n = m.p = m.m = n;
  m.step = [](const Vector& x, const Vector& w) -> Vector { return x + w; };
  m.step_dual = [](std::span<const Dual> x, std::span<const Dual> w) { return add_step(x, w); };
  m.sample_control = [n](const StateVector&, Rng& rng) { return draw_normal(n, rng); };
  m.log_density = [](const StateVector&, const ControlBlock& w) { return normal_log_pdf(w); };
  m.path_hint = additive_hint(n);
  return m;
}

// ---------------------------------------------------------------------------

double selection_walk_sphere_log_density(double x, double w) {
  // {u : (x+u)^2 > (x+w)^2} = {u > a - x} U {u < -a - x} with a = |x + w|.
  const double a = std::abs(x + w);
  const double p_worse = normal_sf(a - x) + normal_cdf(-a - x);
  if (!(p_worse > 0.0)) return kNegInf;
  return std::log(2.0) - 0.5 * kLogTwoPi - 0.5 * w * w + std::log(p_worse);
}

ModelSpec make_selection_walk(const Objective& f, const SelectionWalkOptions& opts) {
  if (!f.f) throw InputError("selection walk needs an objective");
  ModelSpec m;
  m.name = "selection-walk";
  m.n = 1;
  m.p = 1;
  m.m = 2;
  m.step = [](const Vector& x, const Vector& w) -> Vector { return x + w; };
  m.step_dual = [](std::span<const Dual> x, std::span<const Dual> w) { return add_step(x, w); };
  m.sample_control = [f](const StateVector& x, Rng& rng) {
    std::normal_distribution<double> normal;
    Vector u1(1), u2(1);
    u1[0] = normal(rng);
    u2[0] = normal(rng);
    return f(x + u1) <= f(x + u2) ? u1 : u2;
  };
  m.path_hint = additive_hint(1);

  if (f.sphere) {
    m.log_density = [](const StateVector& x, const ControlBlock& w) {
      return selection_walk_sphere_log_density(x[0], w[0]);
    };
    return m;
  }

  if (opts.q_samples < 1000) throw InputError("q_samples must be >= 1000");
  const auto pool = normal_pool(1, opts.q_samples, opts.q_seed);
  auto worse = [f, pool](const StateVector& x, const ControlBlock& w) {
    const double fw = f(x + w);
    std::size_t count = 0;
    for (const auto& u : *pool) count += fw < f(x + u) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(pool->size());
  };
  m.log_density = [worse](const StateVector& x, const ControlBlock& w) {
    const double pw = worse(x, w);
    if (!(pw > 0.0)) return kNegInf;
    return std::log(2.0) + normal_log_pdf(w) + std::log(pw);
  };
  const double sigmas = opts.support_sigmas;
  const double samples = opts.q_samples;
  m.confident_support = [worse, sigmas, samples](const StateVector& x, const ControlBlock& w) {
    const double pw = worse(x, w);
    return pw > sigmas * std::sqrt(pw * (1.0 - pw) / samples);
  };
  return m;
}

// ---------------------------------------------------------------------------

XnesParams xnes_params(int n, int lambda, int mu, const Objective& f, double kappa_m,
                       double kappa_sigma) {
  XnesParams p;
  p.n = n;
  p.lambda = lambda;
  p.mu = mu;
  p.weights.assign(static_cast<std::size_t>(std::max(mu, 0)), mu > 0 ? 1.0 / mu : 0.0);
  p.kappa_m = kappa_m;
  p.kappa_sigma = kappa_sigma;
  p.objective = f;
  validate(p);
  return p;
}

void validate(const XnesParams& p) {
  if (p.n < 1) throw InputError("xnes: n must be >= 1");
  if (p.lambda < 1) throw InputError("xnes: lambda must be >= 1");
  if (p.mu < 1 || p.mu > p.lambda) throw InputError("xnes: need 1 <= mu <= lambda");
  if (static_cast<int>(p.weights.size()) != p.mu) {
    throw InputError("xnes: expected " + std::to_string(p.mu) + " weights");
  }
  const double sum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) throw InputError("xnes: weights must sum to 1");
  if (!(p.kappa_m > 0.0) || !(p.kappa_sigma > 0.0)) {
    throw InputError("xnes: learning rates must be positive");
  }
  if (!p.objective.f) throw InputError("xnes: objective missing");
  if (!p.objective.sphere && p.q_samples < 1000) throw InputError("xnes: q_samples must be >= 1000");
}

SelectionOutcome select_steps(const Objective& f, const StateVector& z,
                              const std::vector<Vector>& candidates, int mu) {
  const int lambda = static_cast<int>(candidates.size());
  if (mu < 1 || mu > lambda) throw InputError("selection needs 1 <= mu <= lambda");
  std::vector<double> fv(lambda);
  for (int i = 0; i < lambda; ++i) fv[i] = f(z + candidates[i]);
  SelectionOutcome out;
  out.permutation.resize(lambda);
  std::iota(out.permutation.begin(), out.permutation.end(), 0);
  std::stable_sort(out.permutation.begin(), out.permutation.end(),
                   [&](int a, int b) { return fv[a] < fv[b]; });
  const auto n = z.size();
  out.selected.resize(n * mu);
  for (int i = 0; i < mu; ++i) out.selected.segment(i * n, n) = candidates[out.permutation[i]];
  return out;
}

QEstimate q_value(const Objective& f, const StateVector& z, const Vector& w, int samples,
                  std::uint64_t seed) {
  if (samples < 1000) throw InputError("q_value needs at least 1000 samples");
  Rng rng = make_rng(seed);
  const double fw = f(z + w);
  std::size_t below = 0;
  for (int i = 0; i < samples; ++i) below += f(z + draw_normal(static_cast<int>(z.size()), rng)) <= fw;
  QEstimate e;
  e.q = static_cast<double>(below) / samples;
  e.one_minus_q = 1.0 - e.q;
  e.se = std::sqrt(e.q * e.one_minus_q / samples);
  return e;
}

QEstimate q_exact_sphere(const StateVector& z, const Vector& w) {
  const auto tails = noncentral_chi_squared_tails(static_cast<int>(z.size()), z.squaredNorm(),
                                                  (z + w).squaredNorm());
  return {tails.lower, tails.upper, 0.0, true};
}

SelectionDensity::SelectionDensity(XnesParams params) : params_(std::move(params)) {
  validate(params_);
  if (!params_.objective.sphere && params_.lambda > params_.mu) {
    pool_ = normal_pool(params_.n, params_.q_samples, params_.q_seed);
  }
}

QEstimate SelectionDensity::q(const StateVector& z, const Vector& w_block) const {
  if (params_.objective.sphere) return q_exact_sphere(z, w_block);
  if (!pool_) return q_value(params_.objective, z, w_block, params_.q_samples, params_.q_seed);
  const double fw = params_.objective(z + w_block);
  std::size_t below = 0;
  for (const auto& u : *pool_) below += params_.objective(z + u) <= fw;
  QEstimate e;
  e.q = static_cast<double>(below) / static_cast<double>(pool_->size());
  e.one_minus_q = 1.0 - e.q;
  e.se = std::sqrt(e.q * e.one_minus_q / static_cast<double>(pool_->size()));
  return e;
}

bool SelectionDensity::untied(const StateVector& z, const ControlBlock& w) const {
  const int n = params_.n;
  std::vector<double> fv(params_.mu);
  for (int i = 0; i < params_.mu; ++i) fv[i] = params_.objective(z + w.segment(i * n, n));
  std::sort(fv.begin(), fv.end());
  return std::adjacent_find(fv.begin(), fv.end()) == fv.end();
}

double SelectionDensity::log_density(const StateVector& z, const ControlBlock& w) const {
  const int n = params_.n;
  const int mu = params_.mu;
  double total = log_falling_factorial(params_.lambda, mu);
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < mu; ++i) {
    const Vector wi = w.segment(i * n, n);
    if (mu > 1) {
      const double fi = params_.objective(z + wi);
      if (!(fi > prev)) return kNegInf;
      prev = fi;
    }
    total += normal_log_pdf(wi);
  }
  const int exponent = params_.lambda - mu;
  if (exponent > 0) {
    const auto qe = q(z, w.segment((mu - 1) * n, n));
    if (!(qe.one_minus_q > 0.0)) return kNegInf;
    total += exponent * std::log(qe.one_minus_q);
  }
  return total;
}

double SelectionDensity::density(const StateVector& z, const ControlBlock& w) const {
  return std::exp(log_density(z, w));
}

bool SelectionDensity::confidently_positive(const StateVector& z, const ControlBlock& w) const {
  if (!(log_density(z, w) > kNegInf)) return false;
  const int exponent = params_.lambda - params_.mu;
  if (params_.objective.sphere || exponent == 0) return true;
  const auto qe = q(z, w.segment((params_.mu - 1) * params_.n, params_.n));
  // Delta method: se of (1-Q)^e relative to its value is e * se_Q / (1-Q).
  return qe.one_minus_q > params_.support_sigmas * exponent * qe.se;
}

double selection_log_density(const XnesParams& params, const StateVector& z,
                             const ControlBlock& w) {
  return SelectionDensity(params).log_density(z, w);
}

double selection_density(const XnesParams& params, const StateVector& z, const ControlBlock& w) {
  return std::exp(selection_log_density(params, z, w));
}

ControlBlock sample_xnes_control(const XnesParams& params, const StateVector& z, Rng& rng) {
  std::vector<Vector> candidates;
  candidates.reserve(params.lambda);
  for (int i = 0; i < params.lambda; ++i) candidates.push_back(draw_normal(params.n, rng));
  return select_steps(params.objective, z, candidates, params.mu).selected;
}

namespace {

/// One block of large norm that F_xNES maps into B(0, tol), strictly ordered
/// by f. Block norms grow geometrically until the step lands.
std::optional<ControlBlock> xnes_kill_block(const ModelSpec& model, const XnesParams& params,
                                            const StateVector& y, double tol, int salt) {
  const int n = params.n;
  const int mu = params.mu;
  Rng rng = make_rng(0x6b696c6cULL, {static_cast<std::uint64_t>(salt)});
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<Vector> dirs;
    for (int i = 0; i < mu; ++i) {
      Vector d = draw_normal(n, rng);
      dirs.push_back(d / d.norm());
    }
    for (double radius = 1.0; radius < 1e3; radius *= 1.25) {
      std::vector<Vector> blocks;
      for (int i = 0; i < mu; ++i) blocks.push_back(radius * (1.0 + 0.05 * i) * dirs[i]);
      const auto sel = select_steps(params.objective, y, blocks, mu);
      const ControlBlock& w = sel.selected;
      if (model.step(y, w).norm() >= tol) continue;
      if (!(model.log_density(y, w) > kNegInf)) break;  // larger norms only get worse
      if (model.confident_support && !model.confident_support(y, w)) break;
      return w;
    }
  }
  return std::nullopt;
}

}  // namespace

ModelSpec make_xnes_chain(const XnesParams& params) {
  validate(params);
  auto dens = std::make_shared<const SelectionDensity>(params);
  ModelSpec m;
  m.name = "xnes";
  m.n = params.n;
  m.p = params.n * params.mu;
  m.m = params.n * params.lambda;
  m.step = [params](const Vector& z, const Vector& w) -> Vector {
    return to_vector(xnes_step<double>(params, as_span(z), as_span(w)));
  };
  m.step_dual = [params](std::span<const Dual> z, std::span<const Dual> w) {
    return xnes_step<Dual>(params, z, w);
  };
  m.sample_control = [params](const StateVector& z, Rng& rng) {
    return sample_xnes_control(params, z, rng);
  };
  m.log_density = [dens](const StateVector& z, const ControlBlock& w) {
    return dens->log_density(z, w);
  };
  if (!params.objective.sphere && params.lambda > params.mu) {
    m.confident_support = [dens](const StateVector& z, const ControlBlock& w) {
      return dens->confidently_positive(z, w);
    };
  }
  if (params.mu > 1) {
    m.smooth_at = [dens](const StateVector& z, const ControlBlock& w) { return dens->untied(z, w); };
  }
  // Any prefix of sampled blocks, then one large-norm block that lands near 0.
  // Only usable when the origin lies inside the target ball.
  m.path_hint = [m_copy = m, params](const StateVector& y, const StateVector& center,
                                     double radius, int k) -> std::optional<ControlSequence> {
    const double tol = radius - center.norm();
    if (k < 1 || !(tol > 0.0)) return std::nullopt;
    Rng rng = make_rng(0x707265666978ULL, {static_cast<std::uint64_t>(k)});
    ControlSequence ws;
    StateVector s = y;
    for (int i = 0; i + 1 < k; ++i) {
      ControlBlock w = m_copy.sample_control(s, rng);
      s = m_copy.step(s, w);
      ws.push_back(std::move(w));
    }
    auto kill = xnes_kill_block(m_copy, params, s, tol, k);
    if (!kill) return std::nullopt;
    ws.push_back(*kill);
    return ws;
  };
  return m;
}

// ---------------------------------------------------------------------------

ModelSpec make_control_ignoring(int n) {
  ModelSpec m;
  m.name = "control-ignoring";
  m.n = m.p = m.m = n;
  m.step = [](const Vector& x, const Vector&) -> Vector { return x; };
  m.step_dual = [](std::span<const Dual> x, std::span<const Dual>) {
    return std::vector<Dual>(x.begin(), x.end());
  };
  m.sample_control = [n](const StateVector&, Rng& rng) { return draw_normal(n, rng); };
  m.log_density = [](const StateVector&, const ControlBlock& w) { return normal_log_pdf(w); };
  return m;
}

ModelSpec make_period_two(double scale) {
  ModelSpec m;
  m.name = "period-two";
  m.n = m.p = m.m = 1;
  m.step = [scale](const Vector& x, const Vector& w) -> Vector { return -x + scale * w; };
  m.step_dual = [scale](std::span<const Dual> x, std::span<const Dual> w) {
    return std::vector<Dual>{-x[0] + scale * w[0]};
  };
  m.sample_control = [](const StateVector&, Rng& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector w(1);
    w[0] = unif(rng);
    return w;
  };
  m.log_density = [](const StateVector&, const ControlBlock& w) {
    return std::abs(w[0]) < 1.0 ? std::log(0.5) : kNegInf;
  };
  return m;
}

ModelSpec make_drift() {
  ModelSpec m;
  m.name = "drift";
  m.n = m.p = m.m = 1;
  m.step = [](const Vector& x, const Vector& w) -> Vector { return x.array() + 1.0 + 0.0 * w[0]; };
  m.step_dual = [](std::span<const Dual> x, std::span<const Dual> w) {
    return std::vector<Dual>{x[0] + 1.0 + 0.0 * w[0]};
  };
  m.sample_control = [](const StateVector&, Rng& rng) { return draw_normal(1, rng); };
  m.log_density = [](const StateVector&, const ControlBlock& w) { return normal_log_pdf(w); };
  return m;
}

ModelSpec make_flip() {
  ModelSpec m;
  m.name = "flip";
  m.n = m.p = m.m = 1;
  m.step = [](const Vector& x, const Vector&) -> Vector { return -x; };
  m.step_dual = [](std::span<const Dual> x, std::span<const Dual>) {
    return std::vector<Dual>{-x[0]};
  };
  m.sample_control = [](const StateVector&, Rng& rng) { return draw_normal(1, rng); };
  m.log_density = [](const StateVector&, const ControlBlock& w) { return normal_log_pdf(w); };
  return m;
}

}  // namespace chainverifier
