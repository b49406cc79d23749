#include "cli.hpp"

int main(int argc, char** argv) { return nir3::cli::run_main(argc, argv); }
