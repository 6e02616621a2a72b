#pragma once

#include <stdexcept>
#include <string>

namespace refloc {

// Malformed instance files / norm tokens. Carries a 1-based line number when
// the source is line-oriented.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_ = 0;
};

// A referenced dataset or file is not available.
class MissingDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver failed to reach its tolerance on every attempted start.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace refloc
