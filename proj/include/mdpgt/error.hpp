#pragma once

#include <stdexcept>
#include <string>

namespace mdpgt {

// Process exit codes returned by the CLI for each fault category.
enum class FaultCategory : int {
  config = 2,
  numeric = 3,
  io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(FaultCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  FaultCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  FaultCategory category_;
};

/// Invalid input: bad config value, malformed graph, precondition violated
/// by the caller.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(FaultCategory::config, what) {}
};

/// Numerical fault during a run: non-finite values, divergence, an
/// impossible trajectory.
class NumericFault : public Error {
 public:
  explicit NumericFault(const std::string& what) : Error(FaultCategory::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(FaultCategory::io, what) {}
};

}  // namespace mdpgt
