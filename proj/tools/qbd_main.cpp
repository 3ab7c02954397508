#include <iostream>

#include "qbd/cli.hpp"

int main(int argc, char** argv) { return qbd::dispatch(argc, argv, std::cout, std::cerr); }
