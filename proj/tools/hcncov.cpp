#include "cli.hpp"

int main(int argc, char** argv) { return hcn::cli::run_cli(argc, argv); }
