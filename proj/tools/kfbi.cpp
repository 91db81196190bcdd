#include <iostream>

#include "kfbi/commands.hpp"

int main(int argc, char** argv) { return kfbi::run_cli(argc, argv, std::cout, std::cerr); }
