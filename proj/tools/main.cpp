#include <iostream>

#include "negotia/cli.hpp"

int main(int argc, char** argv) { return negotia::run(argc, argv, std::cin, std::cout, std::cerr); }
