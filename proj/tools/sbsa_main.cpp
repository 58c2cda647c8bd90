#include "sbsa/cli.hpp"

int main(int argc, char** argv) { return sbsa::run_cli(argc, argv); }
