#include "glag/cli.hpp"

int main(int argc, char** argv) { return glag::cli::main(argc, argv); }
