#include "remitsim/cli.hpp"

int main(int argc, char **argv) { return remitsim::run_cli(argc, argv); }
