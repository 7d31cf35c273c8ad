#include <unistd.h>

#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fm::cli::run(args, std::cout, std::cerr, {static_cast<bool>(isatty(STDOUT_FILENO))});
}
