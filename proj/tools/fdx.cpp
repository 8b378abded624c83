#include <iostream>

#include "fdx/cli.hpp"

int main(int argc, char** argv) { return fdx::cli::run(argc, argv, std::cout, std::cerr); }
