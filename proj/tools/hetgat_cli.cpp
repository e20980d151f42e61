// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <vector>

#include "hetgat/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hetgat::run_cli(args);
}
