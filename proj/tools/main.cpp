#include <iostream>
#include <string>
#include <vector>

#include "spectraclass/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return spectraclass::cli::run(args, std::cout, std::cerr);
}
