#include <iostream>
#include <string>
#include <vector>

#include "trailpack/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return static_cast<int>(trailpack::cli::run(args, std::cout, std::cerr,
                                              trailpack::cli::process_environment()));
}
