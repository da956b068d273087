#include <iostream>

#include "qmet/cli.hpp"

int main(int argc, char** argv) { return qmet::run_cli(argc, argv, std::cout, std::cerr); }
