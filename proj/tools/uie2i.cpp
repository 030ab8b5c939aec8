#include "uie2i/cli.hpp"

int main(int argc, char** argv) { return uie2i::run_cli(argc, argv); }
