#include <iostream>

#include "cift/cli.hpp"

int main(int argc, char** argv) { return cift::cli::run(argc, argv, std::cout, std::cerr); }
