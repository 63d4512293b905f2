#include "qslr/cli.hpp"

int main(int argc, char** argv) { return qslr::run_cli(argc, argv); }
