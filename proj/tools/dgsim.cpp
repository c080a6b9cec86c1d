#include "dgsim/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dgsim::run_cli(argc, argv, std::cout, std::cerr); }
