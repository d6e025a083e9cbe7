#include <iostream>

#include "ragbench/cli.hpp"

int main(int argc, char** argv) {
    return ragbench::cli::run(argc, argv, std::cout, std::cerr);
}
