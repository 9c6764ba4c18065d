#include "octoroll/cli.hpp"

int main(int argc, char** argv) { return octoroll::cli::run(argc, argv); }
