#include "telltale/cli.hpp"

int main(int argc, char** argv) { return telltale::dispatch(argc, argv); }
