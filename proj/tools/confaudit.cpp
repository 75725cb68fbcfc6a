#include "confaudit/cli.hpp"

int main(int argc, char** argv) { return confaudit::cli::main(argc, argv); }
