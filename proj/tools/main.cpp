#include <iostream>

#include "stratcause/cli.hpp"

int main(int argc, char** argv) {
  return stratcause::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
