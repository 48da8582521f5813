#include "cli.hpp"

int main(int argc, char** argv) { return pcsft::cli::main(argc, argv); }
