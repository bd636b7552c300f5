#include <iostream>

#include "sramlet/cli.hpp"

int main(int argc, char** argv)
{
    return sramlet::cli_dispatch(argc, argv, std::cout, std::cerr);
}
