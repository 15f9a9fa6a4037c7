#include "vecci/cli.hpp"

int main(int argc, char** argv) {
    return vecci::cli::run(argc, argv);
}
