#include "acpv/cli/commands.hpp"

int main(int argc, char** argv) { return acpv::cli::run(argc, argv); }
