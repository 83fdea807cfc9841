#include "obstlab/cli.hpp"

int main(int argc, char** argv) { return obstlab::run_cli(argc, argv); }
