#pragma once

#include <stdexcept>
#include <string>

namespace gibbsfit {

enum class ErrorCode {
  invalid_input,
  parse,
  misaligned_window,
  window_too_small,
  model_data_mismatch,
  invalid_parameter,
  infeasible_data,
  configuration,
  ill_conditioned,
  numeric,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace gibbsfit
