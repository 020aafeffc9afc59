#include "wanplace/pipeline.hpp"

int main(int argc, char** argv) { return wanplace::cli_main(argc, argv); }
