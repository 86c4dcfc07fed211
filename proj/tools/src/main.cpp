#include <iostream>

#include "klift_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return klift::cli::run(args, std::cerr);
}
