#include "uplink/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return uplink::run_cli(argc, argv, std::cout, std::cerr); }
