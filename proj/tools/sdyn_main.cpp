#include "sdyn/cli.hpp"

int main(int argc, char** argv) { return sdyn::cli_main(argc, argv); }
