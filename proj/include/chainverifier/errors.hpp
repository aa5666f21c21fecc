#pragma once

#include <stdexcept>
#include <string>

namespace chainverifier {

/// Malformed input: dimension mismatch, empty sequence, bad parameter.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A derivative could not be formed (non-finite entries or a point where the
/// model declares its step non-differentiable).
class DifferentiationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state, failed decomposition.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A control sequence offered as a witness lies outside the control set.
class InvalidWitnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration document problem; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace chainverifier
