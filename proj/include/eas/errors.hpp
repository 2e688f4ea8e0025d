#pragma once

#include <stdexcept>
#include <string>

namespace eas {

// A Cholesky pivot fell at or below the positivity threshold.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegreesOfFreedomError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Every mass passed to a normalizer was -inf.
class AllInadmissible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive best-subset search requested beyond its predictor cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No admissible starting model could be found for a chain.
class InitializationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user input (CSV, JSON, weight files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid option combination or unknown preset.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eas
