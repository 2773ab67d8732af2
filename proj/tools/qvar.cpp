#include <iostream>
#include <string>
#include <vector>

#include "qvar/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return qvar::run_command(args, std::cout, std::cerr);
}
