#pragma once

#include <gsl/gsl_errno.h>

#include <mutex>

namespace btc::detail {

// GSL aborts on errors by default; we report them through return codes instead.
inline void quiet_gsl() {
  static std::once_flag flag;
  std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

}  // namespace btc::detail
