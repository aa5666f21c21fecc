#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chainverifier/core_model.hpp"
#include "chainverifier/diff.hpp"

namespace chainverifier {

/// Multi-start search settings for find_path.
struct SearchBudget {
  int restarts = 64;
  int iterations = 200;  // coordinate-descent sweeps per restart
  double shrink = 0.5;
  double initial_step = 1.0;
  bool use_hints = true;
  std::uint64_t seed = 0;
};

/// A control sequence shown (by re-evaluation) to be a k-steps path from
/// `origin` into the open ball B(target_center, radius).
struct PathCertificate {
  StateVector origin;
  ControlSequence sequence;
  StateVector target_center;
  double radius = 0.0;
  double achieved_distance = 0.0;
  double log_density = 0.0;
  double density_value = 0.0;
  std::string found_by;  // "hint", "sample" or "refine"

  int length() const { return sequence.length(); }
};

/// Re-runs is_path on the certificate using only core-model operations.
bool revalidate(const ModelSpec& model, const PathCertificate& cert);

/// Searches a k-steps path from y into B(center, radius): analytic hints
/// first, then restarts sampled from the model's control sampler, each
/// refined by coordinate descent on the flattened sequence. Moves that leave
/// the control set are rejected. Restart r uses the stream
/// derive_seed(budget.seed, {stream, k, r}).
///
/// nullopt means the budget ran out; it is not evidence that no path exists.
std::optional<PathCertificate> find_path(const ModelSpec& model, const StateVector& y,
                                         const StateVector& center, double radius, int k,
                                         const SearchBudget& budget, std::uint64_t stream = 0);

enum class AttractivityKind { kGlobally, kSteadilyUniform, kSteadilyFixedPoint };

std::string_view to_string(AttractivityKind kind);
std::optional<AttractivityKind> attractivity_kind_from_string(std::string_view s);

struct OriginFailure {
  int origin_index = 0;
  StateVector origin;
  int length = 0;  // 0: no length in 1..horizon worked
};

struct AttractivityCertificate {
  StateVector candidate;
  AttractivityKind kind = AttractivityKind::kGlobally;
  double epsilon = 0.0;
  std::vector<StateVector> tested_origins;
  std::vector<PathCertificate> paths;
  int first_length = 1;  // T for steady attraction, 1 otherwise
  int horizon = 0;       // k_max, or T + span
  std::vector<OriginFailure> failures;
  std::optional<PathCertificate> fixed_point;

  bool certified() const;
};

/// For each origin, the first k in 1..k_max with a path into B(x*, epsilon).
AttractivityCertificate certify_globally_attracting(const ModelSpec& model,
                                                    const StateVector& x_star,
                                                    const std::vector<StateVector>& origins,
                                                    double epsilon, int k_max,
                                                    const SearchBudget& budget);

/// For each origin, a path of every length in [T, T + span]. The finite span
/// stands in for "all k >= T".
AttractivityCertificate certify_steadily_attracting(const ModelSpec& model,
                                                    const StateVector& x_star,
                                                    const std::vector<StateVector>& origins,
                                                    double epsilon, int first_length, int span,
                                                    const SearchBudget& budget);

/// A single block w in O_{x*}^1 with |step(x*, w) - x*| < tol.
std::optional<PathCertificate> certify_fixed_point(const ModelSpec& model,
                                                   const StateVector& x_star, double tol,
                                                   const SearchBudget& budget);

/// Globally attracting + a 1-step stay at x* (valid under the rank condition,
/// which the verdict checks separately).
AttractivityCertificate steadily_from_fixed_point(const AttractivityCertificate& globally,
                                                  const PathCertificate& fixed_point);

int gcd_of(std::span<const int> values);

struct ReturnLengthSet {
  StateVector candidate;
  double epsilon_return = 0.0;
  int k_max = 0;
  std::vector<int> lengths;  // increasing
  int gcd = 0;               // 0 when lengths is empty
  std::vector<PathCertificate> paths;
  std::vector<std::string> warnings;
};

ReturnLengthSet make_return_length_set(StateVector candidate, std::vector<int> lengths);

/// Lengths k <= k_max with a path from x* back into B(x*, epsilon_return).
ReturnLengthSet return_lengths(const ModelSpec& model, const StateVector& x_star,
                               double epsilon_return, int k_max, const SearchBudget& budget);

enum class Conclusion { kPhiIrreducibleTChain, kAperiodicPhiIrreducibleTChain, kInconclusive };

std::string_view to_string(Conclusion c);
std::optional<Conclusion> conclusion_from_string(std::string_view s);

inline constexpr std::string_view kVerdictCaveat =
    "Certificates are sampled numerical evidence (finitely many origins, path lengths and "
    "search restarts, floating-point rank decisions); they are not proofs.";

struct StabilityVerdict {
  StateVector candidate;
  bool rank_ok = false;
  std::optional<RankWitness> rank;
  std::optional<AttractivityCertificate> globally;
  std::optional<AttractivityCertificate> steadily;
  ReturnLengthSet returns;
  int period_lower_bound = 1;
  Conclusion conclusion = Conclusion::kInconclusive;
  std::string caveat{kVerdictCaveat};
  std::vector<std::string> notes;
};

/// Decision table:
///   rank at x* and a steady-attraction certificate -> aperiodic phi-irreducible T-chain
///   rank at x* and a global-attraction certificate -> phi-irreducible T-chain
///   otherwise                                       -> inconclusive
/// Uncertified certificates are kept as evidence but never count. All
/// evidence must refer to the same candidate (InputError otherwise).
StabilityVerdict assemble_verdict(const std::optional<RankWitness>& rank,
                                  const std::optional<AttractivityCertificate>& globally,
                                  const std::optional<AttractivityCertificate>& steadily,
                                  const ReturnLengthSet& returns);

/// Halton points in the box [lo, hi]^n (indices 1..count).
std::vector<StateVector> halton_origins(int n, int count, double lo, double hi);

}  // namespace chainverifier
