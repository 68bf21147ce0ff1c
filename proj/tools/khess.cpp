#include "khess/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return khess::cli_main(argc, argv, std::cout, std::cerr); }
