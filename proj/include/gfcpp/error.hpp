#pragma once

#include <stdexcept>
#include <string>

namespace gfcpp {

/// Series evaluation could not certify the requested tolerance.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A truncated series hit its term cap before converging.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection sampler exceeded its iteration cap.
class SamplerStall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Calendar time lies beyond the simulated subordinator range.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A moment required by a formula is infinite for the chosen jump law.
class MomentUndefined : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not enough usable data points for a fit.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration. `line` is 0 when the problem is not
/// tied to a particular line of the config file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace gfcpp
