#include <iostream>

#include "codemap/cli.hpp"

int main(int argc, char** argv) { return codemap::cli::run(argc, argv, std::cout, std::cerr); }
