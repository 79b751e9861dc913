#include <iostream>

#include "mollow/cli.hpp"

int main(int argc, char** argv) { return mollow::cli::main(argc, argv, std::cout, std::cerr); }
