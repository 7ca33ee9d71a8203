#include "cli.hpp"

int main(int argc, char** argv) { return betalap::cli::run(argc, argv); }
