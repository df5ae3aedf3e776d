#include <iostream>

#include "cuspmi/cli/app.hpp"

int main(int argc, char** argv) { return cuspmi::cli::run(argc, argv, std::cout, std::cerr); }
