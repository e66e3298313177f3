#include "phdim/cli.hpp"

int main(int argc, char** argv) { return phdim::run_cli(argc, argv); }
