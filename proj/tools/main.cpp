#include "ilab/cli.hpp"

int main(int argc, char** argv) { return ilab::dispatch(argc, argv); }
