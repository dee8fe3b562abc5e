#pragma once

#include <iosfwd>

namespace aepnp {

// Entry point of the aepnp tool. Exit status: 0 success, 1 usage error,
// 2 data or solver error.
int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace aepnp
