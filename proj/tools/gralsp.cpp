#include "gralsp/cli.hpp"

int main(int argc, char** argv) { return gralsp::cli::run(argc, argv); }
