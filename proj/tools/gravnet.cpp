#include <iostream>

#include "gravnet/cli/commands.hpp"

int main(int argc, char** argv) {
  return gravnet::cli::run(argc, argv, std::cout, std::cerr);
}
