#include "berezin/cli/runner.hpp"

int main(int argc, char** argv) { return berezin::cli::run(argc, argv); }
