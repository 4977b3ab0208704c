#include "cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return fsard::cli::main(argc, argv, std::cout, std::cerr); }
