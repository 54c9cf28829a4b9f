#include <iostream>

#include "dfield_cli/cli.hpp"

int main(int argc, char** argv) { return dfield::cli::run(argc, argv, std::cout, std::cerr); }
