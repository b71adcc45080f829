#include "strokerisk/cli.hpp"

int main(int argc, char** argv) { return strokerisk::run_cli(argc, argv); }
