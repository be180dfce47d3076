#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sarange {

enum class ErrorCode {
  invalid_argument = 1,
  dimension_mismatch = 2,
  numerical = 3,
  parse = 4,
  io = 5,
  budget_exceeded = 6,
};

/// Every failure raised by the library carries one of the codes above; the C
/// API maps them one-to-one onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::invalid_argument, message);
}

inline void require_dimension(std::size_t expected, std::size_t actual,
                              std::string_view what) {
  if (expected != actual) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": expected dimension " +
                    std::to_string(expected) + ", got " +
                    std::to_string(actual));
  }
}

}  // namespace sarange
