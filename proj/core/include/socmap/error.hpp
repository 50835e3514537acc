#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace socmap {

/// Failure categories raised by the library. Each maps onto one of the CLI
/// exit codes through exit_code().
enum class Errc {
  io,
  schema,
  parse,
  duplicate,
  insufficient_data,
  domain,
  state,
  configuration,
  imputation,
  shape,
  degenerate,
  spec,
  data,
  training,
  convergence,
  leakage,
  format,
  truncation,
  extent,
  registry,
  dependency,
  alignment,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// 2 for filesystem failures, 4 for solver/training failures, 3 otherwise.
int exit_code(Errc code);

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace socmap
