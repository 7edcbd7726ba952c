#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rnn_surgery/mixing.hpp"
#include "rnn_surgery/theory.hpp"
#include "rnn_surgery/training.hpp"
#include "rnn_surgery/windows.hpp"

namespace rnn_surgery::regression {

struct RiskEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    Eigen::Index m = 0;
};

using Predictor = std::function<Vector(const SequenceBatch&)>;

// Monte Carlo mean of (fhat - f*)^2 over m independent stationary windows.
RiskEstimate excess_risk(const Predictor& fitted, const RegressionTask& task, Eigen::Index m, const MixingConfig& cfg);
RiskEstimate excess_risk(const RecurrentNet& fitted, const RegressionTask& task, Eigen::Index m,
                         const MixingConfig& cfg);

// m independent windows (each from a fresh stationary chain) and f* on them.
WindowSet draw_independent_windows(const RegressionTask& task, Eigen::Index m, const MixingConfig& cfg);

struct RateExperimentConfig {
    RegressionTask task;
    MixingConfig mixing;
    std::vector<Eigen::Index> ns;
    int replications = 3;
    TrainConfig train;  // W and L are overwritten by the schedule
    ScheduleParams schedule;
    Eigen::Index mc_size = 10000;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct RunRecord {
    Eigen::Index n = 0;
    int replication = 0;
    double excess_risk = 0.0;
    double std_error = 0.0;
    Eigen::Index W = 0;
    Eigen::Index L = 0;
    double train_loss = 0.0;
    double validation_loss = 0.0;
    double wall_seconds = 0.0;
};

struct RateRow {
    Eigen::Index n = 0;
    double mean_risk = 0.0;
    double std_risk = 0.0;  // across replications
    Eigen::Index W = 0;
    Eigen::Index L = 0;
};

struct RateExperimentResult {
    std::vector<RateRow> rows;  // sorted by n
    std::vector<RunRecord> runs;
    double slope = 0.0;  // least squares of log mean risk on log n; NaN if not fitted
    bool slope_fitted = false;
    double theoretical_exponent = 0.0;
    bool degenerate = false;  // every mean risk <= 1e-3
};

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Runs (n, replication) cells on up to cfg.threads threads; each cell owns
// seeds derived from (seed, n, replication), so scheduling does not matter.
// The slope is fitted when there are at least 3 sizes and 3 replications.
RateExperimentResult rate_experiment(const RateExperimentConfig& cfg);

}  // namespace rnn_surgery::regression
