#include <iostream>

#include "rnn_surgery_cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rnn_surgery::cli::run(args, std::cout, std::cerr);
}
