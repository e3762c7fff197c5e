#pragma once

#include <stdexcept>
#include <string>

namespace tnss {

enum class ErrorKind {
  kInvalidArgument,
  kNotRepresentable,
  kDegenerateBasis,
  kCapacity,
  kDomain,
  kInternalConsistency,
  kConvergence,
  kIo,
};

const char* to_string(ErrorKind kind) noexcept;

/// Library-wide exception. Every failure raised by tnss carries one of the
/// ErrorKind categories so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kNotRepresentable: return "not-representable";
    case ErrorKind::kDegenerateBasis: return "degenerate-basis";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kInternalConsistency: return "internal-consistency";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) raise(kind, what);
}

}  // namespace tnss
