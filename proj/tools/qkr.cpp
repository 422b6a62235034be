#include "qkr/cli.hpp"

int main(int argc, char** argv) { return qkr::cli::main(argc, argv); }
