#include <iostream>

#include "loadclean/tools/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return loadclean::tools::run_cli(args, std::cout, std::cerr);
}
