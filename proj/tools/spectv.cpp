#include <spectv/cli.hpp>

int main(int argc, char** argv) { return spectv::cli::run(argc, argv); }
