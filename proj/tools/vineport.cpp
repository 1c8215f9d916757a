#include "vineport/cli.hpp"

int main(int argc, char** argv) { return vineport::cli::main(argc, argv); }
