#pragma once

#include <iosfwd>

namespace pfsl {

// Command-line entry point. Exit codes: 0 success, 1 usage error,
// 2 numerical failure, 3 I/O failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pfsl
