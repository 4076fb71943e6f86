#include <iostream>
#include <string>
#include <vector>

#include "cfdscope/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return cfdscope::cli::run_main(args, std::cout, std::cerr);
}
