#include <iostream>
#include <string>
#include <vector>

#include "ipn/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return ipn::run(args, std::cout, std::cerr);
}
