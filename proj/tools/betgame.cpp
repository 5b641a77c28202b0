#include "betgame/cli.hpp"

int main(int argc, char** argv) { return betgame::run_cli(argc, argv); }
