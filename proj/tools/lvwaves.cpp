#include "lvwaves/cli.hpp"

int main(int argc, char** argv) { return lvw::cli::run(argc, argv); }
