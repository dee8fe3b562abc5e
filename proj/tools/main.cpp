#include "aepnp/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return aepnp::cli_main(argc, argv, std::cout, std::cerr); }
