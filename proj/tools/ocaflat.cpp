#include "oca/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return oca::run_cli(argc, argv, std::cout, std::cerr); }
