#include "vitslim/cli.hpp"

int main(int argc, char** argv) { return vitslim::run_cli(argc, argv); }
