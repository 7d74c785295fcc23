#include "hsr_cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return hsr::cli::run(argc, argv, std::cout, std::cerr);
}
