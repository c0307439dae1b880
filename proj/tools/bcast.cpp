#include <iostream>

#include "bcast/cli.hpp"

int main(int argc, char** argv) {
  return bcast::cli::run(argc, argv, std::cout, std::cerr);
}
