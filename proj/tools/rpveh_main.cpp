#include <vector>

#include "rpveh/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rpveh::run_cli(args);
}
