#include <iostream>
#include <string>
#include <vector>

#include "dclr/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dclr::dispatch(args, std::cout, std::cerr);
}
