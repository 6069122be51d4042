#include "qmerkle/cli.hpp"

int main(int argc, char** argv) { return qmerkle::cli::run(argc, argv); }
