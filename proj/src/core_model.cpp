#include "chainverifier/core_model.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "chainverifier/errors.hpp"

namespace chainverifier {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

std::string dims(long got, int want) {
  return "got length " + std::to_string(got) + ", expected " + std::to_string(want);
}

}  // namespace

ControlSequence::ControlSequence(std::vector<ControlBlock> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.size() != blocks_.front().size()) {
      throw InputError("control blocks must share one dimension");
    }
  }
}

ControlSequence ControlSequence::from_flat(const Vector& flat, int p) {
  if (p <= 0 || flat.size() % p != 0) {
    throw InputError("flat control vector length " + std::to_string(flat.size()) +
                     " is not a multiple of p = " + std::to_string(p));
  }
  std::vector<ControlBlock> blocks;
  blocks.reserve(flat.size() / p);
  for (Eigen::Index i = 0; i < flat.size(); i += p) blocks.emplace_back(flat.segment(i, p));
  return ControlSequence(std::move(blocks));
}

void ControlSequence::push_back(ControlBlock w) {
  if (!blocks_.empty() && w.size() != blocks_.front().size()) {
    throw InputError("control blocks must share one dimension");
  }
  blocks_.push_back(std::move(w));
}

Vector ControlSequence::flatten() const {
  const int p = block_dim();
  Vector flat(static_cast<Eigen::Index>(p) * length());
  for (int i = 0; i < length(); ++i) flat.segment(static_cast<Eigen::Index>(i) * p, p) = blocks_[i];
  return flat;
}

ControlSequence ControlSequence::slice(int first, int count) const {
  if (first < 0 || count < 0 || first + count > length()) throw InputError("slice out of range");
  return ControlSequence(std::vector<ControlBlock>(blocks_.begin() + first,
                                                   blocks_.begin() + first + count));
}

void check_state(const ModelSpec& model, const StateVector& x) {
  if (x.size() != model.n) throw InputError("state: " + dims(x.size(), model.n));
  if (!all_finite(x)) throw InputError("state has non-finite entries");
}

void check_block(const ModelSpec& model, const ControlBlock& w) {
  if (w.size() != model.p) throw InputError("control block: " + dims(w.size(), model.p));
  if (!all_finite(w)) throw InputError("control block has non-finite entries");
}

void check_sequence(const ModelSpec& model, const ControlSequence& ws) {
  if (ws.empty()) throw InputError("control sequence must contain at least one block");
  for (const auto& w : ws) check_block(model, w);
}

StateVector step(const ModelSpec& model, const StateVector& x, const ControlBlock& w) {
  check_state(model, x);
  check_block(model, w);
  return model.step(x, w);
}

StateVector extended_transition(const ModelSpec& model, const StateVector& x) {
  check_state(model, x);
  return x;
}

StateVector extended_transition(const ModelSpec& model, const StateVector& x,
                                const ControlSequence& ws) {
  check_state(model, x);
  check_sequence(model, ws);
  StateVector s = x;
  for (const auto& w : ws) s = model.step(s, w);
  return s;
}

std::vector<StateVector> visited_states(const ModelSpec& model, const StateVector& x,
                                        const ControlSequence& ws) {
  check_state(model, x);
  check_sequence(model, ws);
  std::vector<StateVector> states;
  states.reserve(ws.length() + 1);
  states.push_back(x);
  for (const auto& w : ws) states.push_back(model.step(states.back(), w));
  return states;
}

double density(const ModelSpec& model, const StateVector& x, const ControlBlock& w) {
  check_state(model, x);
  check_block(model, w);
  return std::exp(model.log_density(x, w));
}

double extended_log_density(const ModelSpec& model, const StateVector& x,
                            const ControlSequence& ws) {
  check_state(model, x);
  check_sequence(model, ws);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  StateVector s = x;
  for (int i = 0; i < ws.length(); ++i) {
    const double lp = model.log_density(s, ws[i]);
    if (!(lp > kNegInf)) return kNegInf;
    total += lp;
    if (i + 1 < ws.length()) s = model.step(s, ws[i]);
  }
  return total;
}

double extended_density(const ModelSpec& model, const StateVector& x, const ControlSequence& ws) {
  return std::exp(extended_log_density(model, x, ws));
}

bool in_control_set(const ModelSpec& model, const StateVector& x, const ControlSequence& ws) {
  const double lp = extended_log_density(model, x, ws);
  if (std::isnan(lp)) return false;
  const double tau = model.density_positivity_threshold;
  const bool above = tau > 0.0 ? lp > std::log(tau) : lp > -std::numeric_limits<double>::infinity();
  if (!above || !model.confident_support) return above;
  StateVector s = x;
  for (const auto& w : ws) {
    if (!model.confident_support(s, w)) return false;
    s = model.step(s, w);
  }
  return true;
}

bool is_path(const ModelSpec& model, const StateVector& y, const ControlSequence& ws,
             const StateVector& center, double radius) {
  if (!(radius > 0.0)) throw InputError("radius must be positive");
  check_state(model, center);
  if (!in_control_set(model, y, ws)) return false;
  return (extended_transition(model, y, ws) - center).norm() < radius;
}

}  // namespace chainverifier
