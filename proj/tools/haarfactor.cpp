#include <iostream>
#include <string>
#include <vector>

#include "haarfactor/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return haarfactor::run_command(args, std::cout, std::cerr);
}
