#include <iostream>

#include "kmeans/harness.hpp"

int main(int argc, char** argv) {
    return kmeans::harness::run_cli(argc, argv, std::cout, std::cerr);
}
