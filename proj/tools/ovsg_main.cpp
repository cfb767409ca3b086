#include <iostream>

#include "ovsg/cli.hpp"

int main(int argc, char** argv) {
  return ovsg::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
