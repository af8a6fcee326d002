#include "ggeval/cli.hpp"

int main(int argc, char** argv) { return ggeval::Dispatch(argc, argv); }
