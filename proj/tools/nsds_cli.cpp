#include <iostream>

#include "nsds/cli.hpp"

int main(int argc, char** argv) { return nsds::cli_main(argc, argv, std::cout, std::cerr); }
