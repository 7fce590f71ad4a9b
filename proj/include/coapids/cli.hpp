#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coapids::cli {

/// Runs one subcommand. args excludes the program name. "-" as an input or
/// output path means the given stream. Returns 0 on success, 1 on data or
/// model errors and 2 on usage errors.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace coapids::cli
