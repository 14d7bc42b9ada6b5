#pragma once

#include <stdexcept>
#include <string>

namespace hcpinn {

/// Mismatched tensor/layer dimensions.
class ShapeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition.
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A point lies outside the closed computational domain.
class DomainError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

/// Bad run configuration (unknown key, invalid value, missing file).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or gradient.
class TrainingError : public std::runtime_error {
  public:
    TrainingError(const std::string& what, long iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}
    long iteration() const { return iteration_; }

  private:
    long iteration_;
};

/// An auxiliary-field verification report failed its tolerances.
class VerificationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Requested feature is deliberately unsupported.
class UnsupportedError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define HCPINN_REQUIRE(cond, exc, msg) \
    do {                               \
        if (!(cond)) throw exc(msg);   \
    } while (0)

}  // namespace hcpinn
