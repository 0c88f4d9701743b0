#include "stresskit/cli.hpp"

int main(int argc, char** argv) { return stresskit::cli::run_cli(argc, argv); }
