#pragma once

#include <ostream>

namespace nsds {

/// Command-line entry point. Returns 0 on success, 1 on model errors and 2
/// on argument errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nsds
