#pragma once

#include <stdexcept>
#include <string>

namespace rnn_surgery {

// Shape mismatches and out-of-range time indices.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// pad() asked to shrink a network.
struct InvalidTargetError : DimensionError {
    using DimensionError::DimensionError;
};

// Unbounded domains, log arguments <= 0, schedule parameters out of range.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Binomial orders whose entries would not fit in 64 bits.
struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridTooLarge : std::length_error {
    using std::length_error::length_error;
};

// Malformed network JSON or run config.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rnn_surgery
