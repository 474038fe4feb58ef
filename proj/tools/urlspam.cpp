#include "cli.hpp"

int main(int argc, char** argv) { return urlspam::cli::run(argc, argv); }
