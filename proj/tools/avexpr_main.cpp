#include "avexpr/cli.hpp"

int main(int argc, char** argv) { return avexpr::cli::run(argc, argv); }
