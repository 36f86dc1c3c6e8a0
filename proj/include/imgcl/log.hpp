#pragma once

#include <spdlog/spdlog.h>

namespace imgcl {

/// Configures the default logger from the IMGCL_LOG environment variable
/// (error | info | debug; default info). Safe to call more than once.
void init_logging();

}  // namespace imgcl
