#include "htrace/cli.hpp"

int main(int argc, char** argv) { return htrace::cli::run(argc, argv); }
