#include <iostream>
#include <string>
#include <vector>

#include "lambdatune/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lambdatune::cli_dispatch(args, std::cout, std::cerr);
}
