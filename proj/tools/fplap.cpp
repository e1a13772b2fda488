#include "fplap/cli.hpp"

int main(int argc, char** argv) { return fplap::run(argc, argv); }
