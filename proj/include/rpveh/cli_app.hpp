#pragma once

#include <string>
#include <vector>

namespace rpveh {

// Runs the command-line front end. Exit codes: 0 success, 2 configuration
// error, 3 identification warning (unbracketed optimum), 4 sizing failure,
// 5 integration failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace rpveh
