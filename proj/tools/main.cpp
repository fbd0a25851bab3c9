#include "fits_cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return fits::cli::main_entry(argc, argv, std::cout, std::cerr); }
