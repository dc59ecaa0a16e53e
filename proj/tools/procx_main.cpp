#include "procx/cli.hpp"

int main(int argc, char** argv) { return procx::run_cli(argc, argv); }
