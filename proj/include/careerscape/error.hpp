#pragma once

#include <stdexcept>
#include <string>

namespace careerscape {

// Process exit codes used by the command-line tool.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ExitCode::usage, what) {}
};

/// Malformed input, violated data invariant, or an impossible request on valid data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ExitCode::data, what) {}
};

/// Non-finite values or failed numerical preconditions.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ExitCode::numeric, what) {}
};

}  // namespace careerscape
