#include "tqr/cli.hpp"

int main(int argc, char** argv) { return tqr::cli_main(argc, argv); }
