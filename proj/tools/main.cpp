#include <iostream>

#include "robust_resolve_cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return robust_resolve::cli::run(args, std::cout, std::cerr);
}
