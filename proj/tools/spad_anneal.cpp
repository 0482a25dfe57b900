#include "spad/cli.hpp"

int main(int argc, char** argv) { return spad::cli::main(argc, argv); }
