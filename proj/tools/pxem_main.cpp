#include <iostream>
#include <string>
#include <vector>

#include "pxem/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return pxem::cli::run(args, std::cout, std::cerr);
}
