#include <iostream>

#include "lhloc/cli.hpp"

int main(int argc, char** argv) { return lhloc::cli::run(argc, argv, std::cout, std::cerr); }
