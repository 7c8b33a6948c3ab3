#ifndef DYNTOK_ERROR_HPP
#define DYNTOK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dyntok {

enum class ErrorKind {
  invalid_argument,
  malformed_header,
  shape_mismatch,
  non_finite,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::malformed_header: return "malformed header";
    case ErrorKind::shape_mismatch: return "shape mismatch";
    case ErrorKind::non_finite: return "non-finite value";
    case ErrorKind::io: return "i/o failure";
  }
  return "unknown";
}

/// Every failure raised by the library. The message is the full diagnostic
/// that the CLI prints, so callers should not need to reformat it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dyntok

#endif  // DYNTOK_ERROR_HPP
