#include <iostream>

#include "oamp/cli.hpp"

int main(int argc, char** argv) { return oamp::cli::run(argc, argv, std::cout, std::cerr); }
