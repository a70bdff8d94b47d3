#include "imc/cli.hpp"

int main(int argc, char** argv) { return imc::cli_main(argc, argv); }
