#include "hwigs_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hwigs::cli::run(argc, argv, std::cout, std::cerr); }
