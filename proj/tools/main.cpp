#include "tempnet/cli.hpp"

int main(int argc, char** argv) { return tempnet::cli_main(argc, argv); }
