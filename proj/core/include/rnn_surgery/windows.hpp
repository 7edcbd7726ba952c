#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rnn_surgery/mixing.hpp"
#include "rnn_surgery/network.hpp"

namespace rnn_surgery::regression {

// Y = f*(X_1, ..., X_N) + eps with eps ~ N(0, sigma^2).
struct RegressionTask {
    std::function<double(const Vector&)> f_star;  // on vec(window), length d_x N
    Eigen::Index N = 1;
    Eigen::Index d_x = 1;
    double sigma = 0.0;
    double beta = 1.0;
    double K = 1.0;
    std::string name;

    void validate() const;
};

// Named regression targets: constant, last-token, mean-sinusoid.
RegressionTask make_task(const std::string& name, Eigen::Index d_x, Eigen::Index N, double sigma, double K,
                         double beta = 1.0, double constant = 0.4);

// Overlapping windows x[t-N+1 .. t] with responses y_t, t = N..n.
struct WindowSet {
    SequenceBatch X;  // N steps, each d_x x count
    Vector y;

    Eigen::Index size() const { return y.size(); }
    WindowSet slice(Eigen::Index begin, Eigen::Index count) const;
};

// ys[t-1] is the response at time t; entries before t = N are ignored.
WindowSet sliding_windows(const SequenceMatrix& xs, const Vector& ys, Eigen::Index N);

// Tokens plus responses y_t = f*(x[t-N+1:t]) + eps_t (NaN for t < N).
struct Sample {
    SequenceMatrix xs;
    Vector ys;
};
Sample generate_sample(const RegressionTask& task, const MixingConfig& cfg, Eigen::Index n);

// Consecutive length-N blocks, trailing tokens dropped.
std::vector<SequenceMatrix> make_blocks(const SequenceMatrix& xs, Eigen::Index N);
// B_a, B_{a+l}, ..., floor(n_blocks / l) of them (1-based a in [1, l]).
std::vector<SequenceMatrix> make_subblocks(const std::vector<SequenceMatrix>& blocks, Eigen::Index l, Eigen::Index a);

}  // namespace rnn_surgery::regression
