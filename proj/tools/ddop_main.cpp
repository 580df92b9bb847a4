#include <iostream>
#include <string>
#include <vector>

#include "ddop/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ddop::cli::run(std::move(args), std::cout, std::cerr);
}
