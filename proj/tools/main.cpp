#include <iostream>

#include "bvp/cli.hpp"

int main(int argc, char** argv) {
    return bvp::cli::run(argc, argv, std::cout, std::cerr);
}
