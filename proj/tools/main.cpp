#include "mshr/cli.hpp"

int main(int argc, char** argv) {
    return mshr::cli::run(argc, argv);
}
