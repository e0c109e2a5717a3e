#include "editsum/cli.hpp"

int main(int argc, char** argv) { return editsum::cli::main(argc, argv); }
