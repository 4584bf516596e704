#include <iostream>

#include "verix/cli.hpp"

int main(int argc, char** argv) { return verix::cli::run(argc, argv, std::cout, std::cerr); }
