#pragma once

#include <stdexcept>
#include <string>

namespace daimon {

/// Caller violated a documented precondition (shape mismatch, bad domain).
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The pre-normalization MLP output vanished; the embedding is undefined.
struct DegenerateOutput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite gradients reached the optimizer.
struct OptimizerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training diverged (NaN loss) or could not proceed.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace daimon
