#include <iostream>

#include "gpr/tools/cli.hpp"

int main(int argc, char** argv) { return gpr::tools::run({argv, argv + argc}, std::cout, std::cerr); }
