#include "qest/harness.hpp"

int main(int argc, char** argv) { return qest::cli::run(argc, argv); }
