#include <iostream>
#include <string>
#include <vector>

#include "flowbp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return flowbp::cli::run(std::move(args), std::cout, std::cerr);
}
