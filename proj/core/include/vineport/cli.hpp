#pragma once

#include <string>
#include <vector>

namespace vineport::cli {

/// Commands: describe, fit-marginals, fit-vine, gof, simulate, optimize,
/// backtest, var-test, es-test, regress, synth. Returns the process exit
/// status; errors are reported on stderr.
int main(int argc, char** argv);
int run(const std::vector<std::string>& args);

} // namespace vineport::cli
