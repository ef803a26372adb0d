#include <iostream>
#include <string>
#include <vector>

#include "corefair/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return corefair::cli::run(args, std::cout);
}
