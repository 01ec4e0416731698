#include <ablist/cli/commands.hpp>

#include <unistd.h>

int main(int argc, char** argv) { return ablist::cli::run_cli(argc, argv, environ); }
