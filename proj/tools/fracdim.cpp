#include <fracdim/cli.hpp>

int main(int argc, char** argv) { return fracdim::cli::run(argc, argv); }
