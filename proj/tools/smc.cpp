#include <iostream>
#include <string>
#include <vector>

#include "smc/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return smc::cli::run(args, std::cout, std::cerr);
}
