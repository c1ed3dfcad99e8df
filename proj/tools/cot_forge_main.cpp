#include "cotforge/cli.hpp"

int main(int argc, char** argv) { return cotforge::dispatch(argc, argv); }
