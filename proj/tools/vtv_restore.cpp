#include <iostream>

#include "vtv/cli.hpp"

int main(int argc, char** argv) { return vtv::cli::run(argc, argv, std::cout, std::cerr); }
