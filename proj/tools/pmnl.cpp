#include <iostream>

#include "pmnl/cli.hpp"

int main(int argc, char** argv) { return pmnl::run_cli(argc, argv, std::cout, std::cerr); }
