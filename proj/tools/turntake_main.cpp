#include <iostream>
#include <string>
#include <vector>

#include "turntake/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return turntake::run_cli(args, std::cout, std::cerr);
}
