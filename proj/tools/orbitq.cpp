#include <iostream>

#include "orbitq/cli.hpp"

int main(int argc, char** argv) { return orbitq::cli::run_cli(argc, argv, std::cout, std::cerr); }
