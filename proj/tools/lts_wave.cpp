#include "ltswave/harness.hpp"

int main(int argc, char** argv) { return ltswave::harness::cli_dispatch(argc, argv); }
