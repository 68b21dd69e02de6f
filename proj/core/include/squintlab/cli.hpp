#pragma once

namespace squintlab {

/// Entry point behind the squintlab binary. Exit codes: 0 success, 2
/// configuration/usage error, 1 runtime error.
int cli_main(int argc, const char* const* argv);

}  // namespace squintlab
