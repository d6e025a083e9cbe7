#pragma once

#include <ostream>

namespace ragbench::cli {

/// Entry point for `ragbench index|run|report|validate`. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ragbench::cli
