#include "lrca/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lrca::cli::run(argc, argv, std::cout, std::cerr); }
