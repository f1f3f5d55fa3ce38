#include <iostream>
#include <string>
#include <vector>

#include "kiefer_cli/command.hpp"

int main(int argc, char** argv) {
  return kiefer::cli::run_command(std::vector<std::string>(argv + 1, argv + argc), std::cout,
                                  std::cerr);
}
