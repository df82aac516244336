#include "dprl/cli.hpp"

int main(int argc, char** argv) { return dprl::cli_main(argc, argv); }
