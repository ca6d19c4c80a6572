#include "pucci/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return pucci::run_cli(argc, argv, std::cout, std::cerr); }
