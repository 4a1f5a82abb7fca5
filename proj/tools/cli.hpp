#ifndef FACTM_TOOLS_CLI_HPP
#define FACTM_TOOLS_CLI_HPP

#include <ostream>

namespace factm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kNumerical = 3,
};

/// Entry point of the `factm` tool: simulate | fit | rotate | evaluate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace factm::cli

#endif  // FACTM_TOOLS_CLI_HPP
