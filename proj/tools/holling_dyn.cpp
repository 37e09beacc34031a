#include "cli.hpp"

int main(int argc, char** argv) { return holling::cli::run(argc, argv); }
