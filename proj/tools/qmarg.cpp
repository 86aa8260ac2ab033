#include "qmarg/cli.hpp"

int main(int argc, char** argv) { return qmarg::cli::run(argc, argv); }
