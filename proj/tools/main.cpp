#include "cli_app.hpp"

int main(int argc, char** argv) { return bubblelab::cli::run_cli(argc, argv); }
