#include <iostream>
#include <string>
#include <vector>

#include "parsimony_threshold/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return parsimony_threshold::run_cli(args, std::cout, std::cerr);
}
