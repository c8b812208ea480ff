#include <iostream>
#include <string>
#include <vector>

#include "cdlab/app/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return cdlab::app::run_cli(args, std::cout, std::cerr);
}
