#pragma once

#include <stdexcept>
#include <string>

namespace opda {

// Exit codes used by the CLI; library errors carry the matching code so the
// tool layer maps one condition to exactly one code.
enum class ErrorCode : int {
  ParseOrValidation = 2,
  ResourceExceeded = 3,
  Precondition = 4,
};

class OpdaError : public std::runtime_error {
 public:
  OpdaError(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public OpdaError {
 public:
  ParseError(const std::string& file, int line, const std::string& msg)
      : OpdaError(ErrorCode::ParseOrValidation,
                  file + ":" + std::to_string(line) + ": " + msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public OpdaError {
 public:
  explicit ValidationError(const std::string& msg)
      : OpdaError(ErrorCode::ParseOrValidation, msg) {}
};

// A word contained a symbol outside the machine's input alphabet.
class InputAlphabetError : public OpdaError {
 public:
  explicit InputAlphabetError(const std::string& msg)
      : OpdaError(ErrorCode::ParseOrValidation, msg) {}
};

// A simulation hit its termination-enforcement bounds and the result would
// otherwise be unsound.  Never silently mapped to false.
class ResourceExceededError : public OpdaError {
 public:
  explicit ResourceExceededError(const std::string& msg)
      : OpdaError(ErrorCode::ResourceExceeded, msg) {}
};

class PreconditionError : public OpdaError {
 public:
  explicit PreconditionError(const std::string& msg)
      : OpdaError(ErrorCode::Precondition, msg) {}
};

// A quantifier block or table enumeration would exceed its string budget.
// Distinct from false: a truncated universal quantifier proves nothing.
class EnumerationBudgetError : public OpdaError {
 public:
  explicit EnumerationBudgetError(const std::string& msg)
      : OpdaError(ErrorCode::Precondition, msg) {}
};

}  // namespace opda
