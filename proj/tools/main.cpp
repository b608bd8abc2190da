#include "swarm/cli.hpp"

int main(int argc, char** argv) { return swarm::run_cli(argc, argv); }
