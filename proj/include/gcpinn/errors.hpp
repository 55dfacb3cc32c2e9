#pragma once

#include <stdexcept>
#include <string>

namespace gcpinn {

/// Non-finite value met while evaluating a model, mapping or loss.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training loss blew up (non-finite or above the divergence threshold).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration or command-line input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gcpinn
