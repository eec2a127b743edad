#include "corrbridge/cli/commands.hpp"

int main(int argc, char** argv) { return corrbridge::run_cli(argc, argv); }
