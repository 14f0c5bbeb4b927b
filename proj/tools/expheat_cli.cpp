#include "expheat/harness.hpp"

int main(int argc, char** argv) { return expheat::run_cli(argc, argv); }
