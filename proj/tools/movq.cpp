#include <movq/cli.hpp>

int main(int argc, char** argv) { return movq::cli(argc, argv); }
