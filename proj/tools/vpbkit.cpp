#include <iostream>

#include "vpb/cli.hpp"

int main(int argc, char** argv) { return vpb::cli::main_entry(argc, argv, std::cout, std::cerr); }
