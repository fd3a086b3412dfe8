#include <iostream>

#include "addrnet/cli.hpp"

int main(int argc, char** argv) { return addrnet::run_cli(argc, argv, std::cout, std::cerr); }
