#include "cli.hpp"

int main(int argc, char** argv) { return giantbic::cli::run(argc, argv); }
