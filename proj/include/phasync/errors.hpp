#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phasync {

// Process exit codes used by the CLI. Each exception type maps onto one.
enum class ExitCode : int { ok = 0, usage = 1, io = 2, divergence = 3 };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::usage; }
};

// Bad configuration, bad argument or violated precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

// A state component left the divergence bound during integration.
class DivergenceError : public Error {
 public:
  DivergenceError(double time, std::size_t component)
      : Error("integration diverged at t=" + std::to_string(time) +
              " (state component " + std::to_string(component) + ")"),
        time_(time),
        component_(component) {}

  double time() const noexcept { return time_; }
  std::size_t component() const noexcept { return component_; }
  ExitCode exit_code() const noexcept override { return ExitCode::divergence; }

 private:
  double time_;
  std::size_t component_;
};

// Phase extraction hit a sample at the origin, where the angle is undefined.
class OriginSampleError : public ConfigError {
 public:
  explicit OriginSampleError(std::size_t sample)
      : ConfigError("phase undefined at sample " + std::to_string(sample) +
                    ": (x, y) = (0, 0)"),
        sample_(sample) {}

  std::size_t sample() const noexcept { return sample_; }

 private:
  std::size_t sample_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

}  // namespace detail

}  // namespace phasync
