#include "trend/cli.hpp"

int main(int argc, char** argv) { return trend::cli::run(argc, argv); }
