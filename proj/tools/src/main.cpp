#include <iostream>

#include "socmap_cli/commands.hpp"

int main(int argc, char** argv) { return socmap::cli::main_entry(argc, argv, std::cout, std::cerr); }
