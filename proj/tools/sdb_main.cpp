#include "sdb/cli.hpp"

int main(int argc, char **argv) { return sdb::run_cli(argc, argv); }
