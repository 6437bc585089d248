#include <vector>

#include "ciosl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ciosl::run_cli(args);
}
