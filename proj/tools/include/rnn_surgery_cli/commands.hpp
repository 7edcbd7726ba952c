#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rnn_surgery::cli {

// Stable exit codes.
enum ExitCode : int {
    kOk = 0,
    kVerifyFailed = 1,
    kBadInput = 2,
    kShapeError = 3,
    kTrainingFailed = 4,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// RNN_SURGERY_THREADS if set and positive, else the hardware thread count.
int thread_cap();

}  // namespace rnn_surgery::cli
