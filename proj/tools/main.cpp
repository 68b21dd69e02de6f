#include "squintlab/cli.hpp"

int main(int argc, char** argv) { return squintlab::cli_main(argc, argv); }
