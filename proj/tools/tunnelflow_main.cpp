#include <iostream>
#include <string>
#include <vector>

#include "tunnelflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tunnelflow::cli::run_cli(args, std::cout, std::cerr);
}
