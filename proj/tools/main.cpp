#include "admctl/cli.hpp"

int main(int argc, char **argv) { return admctl::run_cli(argc, argv); }
