#include <iostream>

#include "eigsurg/cli.hpp"

int main(int argc, char** argv) { return eigsurg::cli::main(argc, argv, std::cout, std::cerr); }
