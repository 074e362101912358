#include <iostream>
#include <string>
#include <vector>

#include "boxguard/cli.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return boxguard::cli_dispatch(args, std::cout, std::cerr);
}
