#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rnn_surgery/network.hpp"
#include "rnn_surgery/windows.hpp"

namespace rnn_surgery::regression {

enum class Optimizer { gd, adam };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

struct TrainConfig {
    Eigen::Index W = 8;
    std::size_t L = 1;
    double K = 1.0;  // output clip of the hypothesis class
    double learning_rate = 1e-3;
    int epochs = 500;
    int restarts = 1;
    double validation_fraction = 0.2;  // contiguous tail of the windows
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
    // Keep the epoch with the lowest validation loss instead of the last one.
    bool keep_best_validation = true;
    int eval_every = 5;

    void validate() const;
};

// clip(Q h_L[N]) for every window in the batch.
Vector predict(const RecurrentNet& net, const SequenceBatch& X);

// Mean squared error of predict() against y; fills grad (same shapes as net,
// output_clip unused) by backpropagation through time when non-null.
double loss_and_gradient(const RecurrentNet& net, const SequenceBatch& X, const Vector& y, RecurrentNet* grad);

// Parameter order: P, then (A, B, c) per layer, then Q; row-major.
Vector flatten(const RecurrentNet& net);
void unflatten(const Vector& theta, RecurrentNet& net);

RecurrentNet init_network(Eigen::Index d_x, Eigen::Index W, std::size_t L, double K, std::mt19937_64& rng);

struct TrainResult {
    RecurrentNet net;
    double train_loss = 0.0;
    double validation_loss = 0.0;
    int best_restart = 0;
    int best_epoch = 0;
    std::vector<double> loss_trace;  // training loss per epoch of the chosen restart
    std::vector<std::string> restart_log;
};

// Full-batch gradient descent (or Adam) on the sliding-window empirical risk,
// several restarts, chosen by validation loss. Throws TrainingDiverged when
// every restart produced a non-finite loss.
TrainResult train_erm(const RegressionTask& task, const WindowSet& data, const TrainConfig& cfg);

}  // namespace rnn_surgery::regression
