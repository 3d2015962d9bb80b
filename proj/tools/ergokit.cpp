#include "ergokit/cli.hpp"

int main(int argc, char** argv) { return ergokit::cli::run(argc, argv); }
