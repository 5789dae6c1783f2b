#pragma once

#include <string>
#include <vector>

namespace ppct {

/// Exit codes: 0 success, 2 usage, 3 input format, 4 numerical failure.
int cli_main(int argc, char** argv);

/// Same, with the arguments after the program name.
int cli_main(const std::vector<std::string>& args);

} // namespace ppct
