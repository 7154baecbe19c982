#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdyn {

// sdyn <generate|train|evaluate|sweep> --config FILE [--seed N] [--workers N] [--out DIR]
// Returns 0 on success, 2 for a malformed command line or config, 1 when the
// run itself fails.
int cli_main(int argc, char** argv);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdyn
