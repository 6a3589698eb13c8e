#include <iostream>

#include "srpg/cli.hpp"

int main(int argc, char** argv) { return srpg::cli::run(argc, argv, std::cout, std::cerr); }
