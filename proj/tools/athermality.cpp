#include "athermality/cli.hpp"

int main(int argc, char** argv) { return athermality::cli::run_cli(argc, argv); }
