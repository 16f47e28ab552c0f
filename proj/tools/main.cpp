#include "cli.hpp"

int main(int argc, char** argv) { return extcam::cli::dispatch(argc, argv); }
