#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace iris {

using i64 = std::int64_t;

enum class ErrorKind {
  Validation,  // bad input data or configuration
  Io,          // filesystem or serialization failure
  Dimension,   // tensor / shape mismatch
  Divergence,  // training produced a non-finite loss
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

namespace diag {

using Sink = std::function<void(const std::string&)>;

// Warnings go through a process-global sink so the CLI and tests can capture
// or silence them. Passing an empty sink restores the default (stderr).
void set_sink(Sink sink);
void warn(const std::string& msg);

}  // namespace diag

}  // namespace iris
