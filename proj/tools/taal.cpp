// taal command-line entry point.

#include <iostream>
#include <string>
#include <vector>

#include "taal/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return taal::cli::run(args, std::cout, std::cerr);
}
