#include "coapids/cli.hpp"

int main(int argc, char** argv) { return coapids::cli::run(argc, argv); }
