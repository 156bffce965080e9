#include <iostream>

#include "firmfacts/cli.hpp"

int main(int argc, char** argv) { return firmfacts::cli::run(argc, argv, std::cout, std::cerr); }
