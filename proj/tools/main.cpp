#include "rotosense/cli.hpp"

int main(int argc, char** argv) { return rotosense::cli::run_cli(argc, argv); }
