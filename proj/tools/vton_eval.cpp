#include "vton/cli/commands.hpp"

int main(int argc, char** argv) { return vton::cli::run_cli(argc, argv); }
