#include "sfde/cli.hpp"

int main(int argc, char** argv) { return sfde::cli::main_entry(argc, argv); }
