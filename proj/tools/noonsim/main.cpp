#include <iostream>
#include <string>
#include <vector>

#include "noonsim/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return noon::cli::run(args, std::cout, std::cerr);
}
