#include "gridsentry/cli.hpp"

int main(int argc, char** argv) { return gridsentry::run_cli(argc, argv); }
