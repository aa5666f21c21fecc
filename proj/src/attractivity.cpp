#include "chainverifier/attractivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "chainverifier/errors.hpp"
#include "chainverifier/parallel.hpp"

namespace chainverifier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum StreamTag : std::uint64_t { kGlobalTag = 1, kSteadyTag = 2, kReturnTag = 3, kFixedTag = 4 };

std::uint64_t stream_id(StreamTag tag, std::size_t index) {
  return (static_cast<std::uint64_t>(tag) << 32) | static_cast<std::uint64_t>(index);
}

/// Distance of S_y^k(ws) to center, +inf outside the control set.
double path_distance(const ModelSpec& model, const StateVector& y, const ControlSequence& ws,
                     const StateVector& center) {
  if (!in_control_set(model, y, ws)) return kInf;
  const double d = (extended_transition(model, y, ws) - center).norm();
  return std::isfinite(d) ? d : kInf;
}

PathCertificate make_certificate(const ModelSpec& model, const StateVector& y,
                                 const ControlSequence& ws, const StateVector& center,
                                 double radius, std::string found_by) {
  PathCertificate c;
  c.origin = y;
  c.sequence = ws;
  c.target_center = center;
  c.radius = radius;
  c.achieved_distance = (extended_transition(model, y, ws) - center).norm();
  c.log_density = extended_log_density(model, y, ws);
  c.density_value = std::exp(c.log_density);
  c.found_by = std::move(found_by);
  return c;
}

/// Candidates that tie (and so sit outside the control set) get a tiny
/// random nudge before being given up on.
bool nudge_into_control_set(const ModelSpec& model, const StateVector& y, ControlSequence& ws,
                            Rng& rng) {
  if (in_control_set(model, y, ws)) return true;
  std::normal_distribution<double> normal;
  const int p = ws.block_dim();
  for (int attempt = 0; attempt < 3; ++attempt) {
    Vector flat = ws.flatten();
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      flat[i] += 1e-9 * (1.0 + std::abs(flat[i])) * normal(rng);
    }
    ControlSequence trial = ControlSequence::from_flat(flat, p);
    if (in_control_set(model, y, trial)) {
      ws = std::move(trial);
      return true;
    }
  }
  return false;
}

/// Coordinate descent on the flattened sequence; returns true once inside
/// the target ball.
bool refine(const ModelSpec& model, const StateVector& y, ControlSequence& ws,
            const StateVector& center, double radius, const SearchBudget& budget) {
  const int p = ws.block_dim();
  Vector flat = ws.flatten();
  double best = path_distance(model, y, ws, center);
  if (!std::isfinite(best)) return false;
  double s = std::max(budget.initial_step, best);
  for (int it = 0; it < budget.iterations && best >= radius; ++it) {
    bool improved = false;
    for (Eigen::Index j = 0; j < flat.size() && best >= radius; ++j) {
      for (double sign : {1.0, -1.0}) {
        const double old = flat[j];
        flat[j] = old + sign * s;
        const auto trial = ControlSequence::from_flat(flat, p);
        const double d = path_distance(model, y, trial, center);
        if (d < best) {
          best = d;
          improved = true;
          break;
        }
        flat[j] = old;
      }
    }
    if (!improved) {
      s *= budget.shrink;
      if (s < 1e-15 * (1.0 + flat.norm())) break;
    }
  }
  ws = ControlSequence::from_flat(flat, p);
  return best < radius;
}

}  // namespace

bool revalidate(const ModelSpec& model, const PathCertificate& cert) {
  return is_path(model, cert.origin, cert.sequence, cert.target_center, cert.radius);
}

std::optional<PathCertificate> find_path(const ModelSpec& model, const StateVector& y,
                                         const StateVector& center, double radius, int k,
                                         const SearchBudget& budget, std::uint64_t stream) {
  if (!(radius > 0.0)) throw InputError("radius must be positive");
  if (k < 1) throw InputError("path length must be >= 1");
  check_state(model, y);
  check_state(model, center);
  const auto kk = static_cast<std::uint64_t>(k);

  if (budget.use_hints && model.path_hint) {
    if (auto hint = model.path_hint(y, center, radius, k); hint && hint->length() == k) {
      Rng rng = make_rng(budget.seed, {stream, kk, 0xffffffffULL});
      if (nudge_into_control_set(model, y, *hint, rng) && is_path(model, y, *hint, center, radius)) {
        return make_certificate(model, y, *hint, center, radius, "hint");
      }
    }
  }

  for (int r = 0; r < budget.restarts; ++r) {
    Rng rng = make_rng(budget.seed, {stream, kk, static_cast<std::uint64_t>(r)});
    ControlSequence ws;
    StateVector s = y;
    for (int i = 0; i < k; ++i) {
      ControlBlock w = model.sample_control(s, rng);
      s = model.step(s, w);
      ws.push_back(std::move(w));
    }
    if (!nudge_into_control_set(model, y, ws, rng)) continue;
    if (is_path(model, y, ws, center, radius)) {
      return make_certificate(model, y, ws, center, radius, "sample");
    }
    if (refine(model, y, ws, center, radius, budget) && is_path(model, y, ws, center, radius)) {
      return make_certificate(model, y, ws, center, radius, "refine");
    }
  }
  return std::nullopt;
}

std::string_view to_string(AttractivityKind kind) {
  switch (kind) {
    case AttractivityKind::kGlobally: return "globally";
    case AttractivityKind::kSteadilyUniform: return "steadily-uniform";
    case AttractivityKind::kSteadilyFixedPoint: return "steadily-fixed-point";
  }
  return "globally";
}

std::optional<AttractivityKind> attractivity_kind_from_string(std::string_view s) {
  for (auto k : {AttractivityKind::kGlobally, AttractivityKind::kSteadilyUniform,
                 AttractivityKind::kSteadilyFixedPoint}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool AttractivityCertificate::certified() const {
  if (tested_origins.empty() || !failures.empty()) return false;
  return kind != AttractivityKind::kSteadilyFixedPoint || fixed_point.has_value();
}

AttractivityCertificate certify_globally_attracting(const ModelSpec& model,
                                                    const StateVector& x_star,
                                                    const std::vector<StateVector>& origins,
                                                    double epsilon, int k_max,
                                                    const SearchBudget& budget) {
  if (origins.empty()) throw InputError("origins must be nonempty");
  if (k_max < 1) throw InputError("k_max must be >= 1");
  check_state(model, x_star);

  std::vector<std::optional<PathCertificate>> found(origins.size());
  parallel_for(origins.size(), [&](std::size_t i) {
    for (int k = 1; k <= k_max && !found[i]; ++k) {
      found[i] = find_path(model, origins[i], x_star, epsilon, k, budget, stream_id(kGlobalTag, i));
    }
  });

  AttractivityCertificate cert;
  cert.candidate = x_star;
  cert.kind = AttractivityKind::kGlobally;
  cert.epsilon = epsilon;
  cert.tested_origins = origins;
  cert.first_length = 1;
  cert.horizon = k_max;
  for (std::size_t i = 0; i < origins.size(); ++i) {
    if (found[i]) {
      cert.paths.push_back(std::move(*found[i]));
    } else {
      cert.failures.push_back({static_cast<int>(i), origins[i], 0});
    }
  }
  return cert;
}

AttractivityCertificate certify_steadily_attracting(const ModelSpec& model,
                                                    const StateVector& x_star,
                                                    const std::vector<StateVector>& origins,
                                                    double epsilon, int first_length, int span,
                                                    const SearchBudget& budget) {
  if (origins.empty()) throw InputError("origins must be nonempty");
  if (first_length < 1) throw InputError("T must be >= 1");
  if (span < 1) throw InputError("span must be >= 1");
  check_state(model, x_star);

  const int lengths = span + 1;
  std::vector<std::vector<std::optional<PathCertificate>>> found(
      origins.size(), std::vector<std::optional<PathCertificate>>(lengths));
  parallel_for(origins.size(), [&](std::size_t i) {
    for (int j = 0; j < lengths; ++j) {
      found[i][j] = find_path(model, origins[i], x_star, epsilon, first_length + j, budget,
                              stream_id(kSteadyTag, i));
    }
  });

  AttractivityCertificate cert;
  cert.candidate = x_star;
  cert.kind = AttractivityKind::kSteadilyUniform;
  cert.epsilon = epsilon;
  cert.tested_origins = origins;
  cert.first_length = first_length;
  cert.horizon = first_length + span;
  for (std::size_t i = 0; i < origins.size(); ++i) {
    for (int j = 0; j < lengths; ++j) {
      if (found[i][j]) {
        cert.paths.push_back(std::move(*found[i][j]));
      } else {
        cert.failures.push_back({static_cast<int>(i), origins[i], first_length + j});
      }
    }
  }
  return cert;
}

std::optional<PathCertificate> certify_fixed_point(const ModelSpec& model,
                                                   const StateVector& x_star, double tol,
                                                   const SearchBudget& budget) {
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  return find_path(model, x_star, x_star, tol, 1, budget, stream_id(kFixedTag, 0));
}

AttractivityCertificate steadily_from_fixed_point(const AttractivityCertificate& globally,
                                                  const PathCertificate& fixed_point) {
  if (globally.kind != AttractivityKind::kGlobally) {
    throw InputError("fixed-point route needs a global-attraction certificate");
  }
  if (fixed_point.origin != globally.candidate || fixed_point.target_center != globally.candidate) {
    throw InputError("fixed-point certificate is not at the candidate");
  }
  AttractivityCertificate cert = globally;
  cert.kind = AttractivityKind::kSteadilyFixedPoint;
  cert.fixed_point = fixed_point;
  return cert;
}

int gcd_of(std::span<const int> values) {
  int g = 0;
  for (int v : values) g = std::gcd(g, v);
  return g;
}

ReturnLengthSet make_return_length_set(StateVector candidate, std::vector<int> lengths) {
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
  for (int v : lengths) {
    if (v < 1) throw InputError("return lengths must be positive");
  }
  ReturnLengthSet set;
  set.candidate = std::move(candidate);
  set.lengths = std::move(lengths);
  set.gcd = gcd_of(set.lengths);
  if (set.lengths.empty()) set.warnings.push_back("no return path found; gcd reported as 0");
  return set;
}

ReturnLengthSet return_lengths(const ModelSpec& model, const StateVector& x_star,
                               double epsilon_return, int k_max, const SearchBudget& budget) {
  if (k_max < 1) throw InputError("k_max must be >= 1");
  check_state(model, x_star);
  std::vector<std::optional<PathCertificate>> found(k_max);
  parallel_for(static_cast<std::size_t>(k_max), [&](std::size_t j) {
    found[j] = find_path(model, x_star, x_star, epsilon_return, static_cast<int>(j) + 1, budget,
                         stream_id(kReturnTag, 0));
  });
  std::vector<int> lengths;
  std::vector<PathCertificate> paths;
  for (int k = 1; k <= k_max; ++k) {
    if (found[k - 1]) {
      lengths.push_back(k);
      paths.push_back(std::move(*found[k - 1]));
    }
  }
  auto set = make_return_length_set(x_star, std::move(lengths));
  set.epsilon_return = epsilon_return;
  set.k_max = k_max;
  set.paths = std::move(paths);
  return set;
}

std::string_view to_string(Conclusion c) {
  switch (c) {
    case Conclusion::kPhiIrreducibleTChain: return "phi-irreducible-T-chain";
    case Conclusion::kAperiodicPhiIrreducibleTChain: return "aperiodic-phi-irreducible-T-chain";
    case Conclusion::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::optional<Conclusion> conclusion_from_string(std::string_view s) {
  for (auto c : {Conclusion::kPhiIrreducibleTChain, Conclusion::kAperiodicPhiIrreducibleTChain,
                 Conclusion::kInconclusive}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

StabilityVerdict assemble_verdict(const std::optional<RankWitness>& rank,
                                  const std::optional<AttractivityCertificate>& globally,
                                  const std::optional<AttractivityCertificate>& steadily,
                                  const ReturnLengthSet& returns) {
  std::optional<StateVector> candidate;
  auto agree = [&](const StateVector& x, const char* what) {
    if (!candidate) {
      candidate = x;
    } else if (x.size() != candidate->size() || x != *candidate) {
      throw InputError(std::string("evidence refers to a different candidate point: ") + what);
    }
  };
  if (rank) agree(rank->point, "rank witness");
  if (globally) agree(globally->candidate, "global-attraction certificate");
  if (steadily) agree(steadily->candidate, "steady-attraction certificate");
  if (returns.candidate.size() > 0) agree(returns.candidate, "return lengths");
  if (globally && globally->kind != AttractivityKind::kGlobally) {
    throw InputError("globally slot holds a steady-attraction certificate");
  }
  if (steadily && steadily->kind == AttractivityKind::kGlobally) {
    throw InputError("steadily slot holds a global-attraction certificate");
  }

  StabilityVerdict v;
  v.candidate = candidate.value_or(StateVector());
  v.rank = rank;
  v.globally = globally;
  v.steadily = steadily;
  v.returns = returns;
  v.rank_ok = rank && rank->report.full_rank;

  const bool steady_ok = steadily && steadily->certified();
  // Steady attraction implies global attraction.
  const bool global_ok = (globally && globally->certified()) || steady_ok;

  if (v.rank_ok && steady_ok) {
    v.conclusion = Conclusion::kAperiodicPhiIrreducibleTChain;
  } else if (v.rank_ok && global_ok) {
    v.conclusion = Conclusion::kPhiIrreducibleTChain;
  } else {
    v.conclusion = Conclusion::kInconclusive;
  }

  if (returns.gcd > 1) {
    v.period_lower_bound = returns.gcd;
    v.notes.push_back("return lengths share gcd " + std::to_string(returns.gcd) +
                      ": evidence of a cycle, against aperiodicity");
    if (steady_ok) {
      v.notes.push_back("steady-attraction certificate and return-length gcd disagree; "
                        "increase k_max or the search budget");
    }
  }
  if (rank && rank->report.borderline) {
    v.notes.push_back("rank decision is borderline for tolerance " +
                      std::to_string(rank->report.tolerance));
  }
  if (rank && rank->route == DerivativeRoute::kFiniteDifference) {
    v.notes.push_back("controllability matrix formed with finite differences");
  }
  if (steadily && steadily->kind == AttractivityKind::kSteadilyUniform) {
    v.notes.push_back("steady attraction checked for lengths " +
                      std::to_string(steadily->first_length) + ".." +
                      std::to_string(steadily->horizon) + " only");
  }
  for (const auto& w : returns.warnings) v.notes.push_back(w);
  return v;
}

std::vector<StateVector> halton_origins(int n, int count, double lo, double hi) {
  static constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                    43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
  if (n < 1 || n > static_cast<int>(std::size(kPrimes))) {
    throw InputError("halton origins support 1 <= n <= 25");
  }
  if (count < 0 || !(hi >= lo)) throw InputError("bad origin box");
  std::vector<StateVector> pts;
  pts.reserve(count);
  for (int i = 1; i <= count; ++i) {
    StateVector x(n);
    for (int d = 0; d < n; ++d) {
      double f = 1.0, r = 0.0;
      for (int idx = i; idx > 0; idx /= kPrimes[d]) {
        f /= kPrimes[d];
        r += f * (idx % kPrimes[d]);
      }
      x[d] = lo + (hi - lo) * r;
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

}  // namespace chainverifier
