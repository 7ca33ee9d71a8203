#pragma once

namespace betalap::cli {

/// Entry point of the betalap command-line tool. Returns 0 on success, 1 on
/// usage, domain or configuration errors and 2 when verification fails.
int run(int argc, char** argv);

}  // namespace betalap::cli
