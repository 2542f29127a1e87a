#include "cli.hpp"

int main(int argc, char** argv) { return lesionkit::tools::run_cli(argc, argv); }
