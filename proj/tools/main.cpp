#include <iostream>
#include <string>
#include <vector>

#include "corescale/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return corescale::cli::run(std::move(args), std::cout, std::cerr);
}
