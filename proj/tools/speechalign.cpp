#include <iostream>
#include <string>
#include <vector>

#include "speechalign/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return speechalign::cli::run(args, std::cout, std::cerr);
}
