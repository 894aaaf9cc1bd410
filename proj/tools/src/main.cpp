#include <iostream>

#include "poststab_cli/cli.hpp"

int main(int argc, char** argv) {
  try {
    return poststab::cli::run(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "poststab: " << e.what() << '\n';
    return poststab::cli::kInputError;
  }
}
