#include <iostream>

#include "stochsym/cli.hpp"

int main(int argc, char** argv) { return stochsym::cli::run(argc, argv, std::cout); }
