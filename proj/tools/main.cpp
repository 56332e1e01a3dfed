#include "fdakit/cli.hpp"

int main(int argc, char** argv) { return fdakit::cli::run(argc, argv); }
