#include "selnoise/cli.hpp"

int main(int argc, char** argv) { return selnoise::cli::run(argc, argv); }
