#include <iostream>

#include "tacticrl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tacticrl::run_cli(args, std::cout, std::cerr);
}
