#include "caseseg/cli.hpp"

int main(int argc, char** argv) { return caseseg::cli::main(argc, argv); }
