#include <string>
#include <vector>

#include "adequacy/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return adequacy::cli::run(std::move(args));
}
