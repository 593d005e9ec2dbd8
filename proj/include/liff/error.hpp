#pragma once

#include <stdexcept>
#include <string>

namespace liff {

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  invalid_input,      // unreadable or malformed data
  invalid_parameter,  // a parameter violates its contract
  out_of_range,       // a request outside what the data supports
  degenerate,         // numerically degenerate case
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace liff
