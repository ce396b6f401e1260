#include <iostream>

#include "qecsp/cli.hpp"

int main(int argc, char** argv) { return qecsp::run_cli(argc, argv, std::cout, std::cerr); }
