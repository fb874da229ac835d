#include "didforge/cli.hpp"

int main(int argc, char** argv) { return didforge::run_cli(argc, argv); }
