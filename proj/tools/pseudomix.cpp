#include "pseudomix/cli.hpp"

int main(int argc, char** argv) { return pseudomix::cli::run(argc, argv); }
