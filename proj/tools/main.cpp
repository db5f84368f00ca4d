#include <iostream>

#include "wassos/cli.hpp"

int main(int argc, char** argv) { return wassos::run_cli(argc, argv, std::cout, std::cerr); }
