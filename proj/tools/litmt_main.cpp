#include <string>
#include <vector>

#include "litmt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return litmt::run_cli(args);
}
