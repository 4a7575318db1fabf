#include <iostream>
#include <string>
#include <vector>

#include "cmseq/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cmseq::run(args, std::cout, std::cerr);
}
