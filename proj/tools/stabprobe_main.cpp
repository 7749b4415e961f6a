#include <vector>

#include "stabprobe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stabprobe::run_cli(args);
}
