#include <iostream>

#include "ssep/harness.hpp"

int main(int argc, char** argv) { return ssep::run_cli(argc, argv, std::cout, std::cerr); }
