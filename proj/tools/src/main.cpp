#include <iostream>

#include "sketchcue/cli.hpp"

int main(int argc, char** argv) {
  return sketchcue::cli_run({argv + 1, argv + argc}, std::cout, std::cerr);
}
