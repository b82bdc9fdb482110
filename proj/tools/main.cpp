#include <iostream>

#include "msda/cli.hpp"

int main(int argc, char** argv)
{
    return msda::run_cli(argc, argv, std::cout, std::cerr);
}
