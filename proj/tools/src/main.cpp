#include "pacbayes_cli/cli.hpp"

int main(int argc, char** argv) { return pacbayes::cli::run(argc, argv); }
