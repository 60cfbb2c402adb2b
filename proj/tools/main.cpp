#include <iostream>
#include <string>
#include <vector>

#include "taxorank/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return taxorank::run(args, std::cout, std::cerr);
}
