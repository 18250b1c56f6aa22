#include "focusfl/experiment.hpp"

int main(int argc, char** argv) { return focusfl::run_cli(argc, argv); }
