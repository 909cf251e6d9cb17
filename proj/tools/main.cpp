#include <iostream>
#include <string>
#include <vector>

#include "jumpdiff/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return jumpdiff::cli::run(std::move(args), std::cout, std::cerr);
}
