#include "sapd/cli.hpp"

int main(int argc, char** argv) { return sapd::cli::run(argc, argv); }
