#include <iostream>

#include "rrmab/cli.hpp"

int main(int argc, char** argv) {
    return rrmab::cli::run(argc, argv, std::cout, std::cerr);
}
