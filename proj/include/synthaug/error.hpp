#pragma once

#include <stdexcept>
#include <string>

namespace synthaug {

enum class ErrorCode {
  invalid_argument = 1,
  dimension_mismatch,
  non_finite,
  parse_error,
  io_error,
  insufficient_data,
  pool_shortfall,
  empty_result,
  training_failure,
};

// Every failure raised by the library carries one of the codes above; the C
// boundary maps them onto sa_status values one-to-one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace synthaug
