#ifndef SAGA_ERRORS_HPP
#define SAGA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace saga {

/// Numerical failure: non-finite values, factorization breakdown, unstable state.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A surrogate could not be fitted (all restarts failed).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// An objective evaluation failed; message names the replicate.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, int replicate)
      : std::runtime_error(what), replicate_index(replicate) {}
  int replicate_index;
};

/// Bad experiment configuration; message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A run artifact on disk is missing or malformed.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace saga

#endif
