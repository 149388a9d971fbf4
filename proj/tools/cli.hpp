#pragma once

#include <iosfwd>

namespace sheesh::cli {

/// Exit codes: 0 success, 2 configuration error, 3 I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sheesh::cli
