#include "ppct/cli.hpp"

int main(int argc, char** argv) { return ppct::cli_main(argc, argv); }
