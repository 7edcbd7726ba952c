#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rnn_surgery/linalg.hpp"

namespace rnn_surgery {

// Sequences are column-major: column t-1 holds token x[t].
using SequenceMatrix = Eigen::MatrixXd;

struct TokenSequence {
    SequenceMatrix data;  // d_x x N

    TokenSequence() = default;
    TokenSequence(SequenceMatrix m);  // NOLINT: implicit on purpose

    Eigen::Index dim() const { return data.rows(); }
    Eigen::Index length() const { return data.cols(); }
    // 1-based, as in the math.
    auto token(Eigen::Index t) const { return data.col(t - 1); }
    // vec(x[1:t]) stacked token by token.
    Vector prefix(Eigen::Index t) const;
};

struct AffineLayer {
    Matrix weight;
    Vector bias;
};

// ReLU after every layer but the last.
struct FeedforwardNet {
    std::vector<AffineLayer> layers;

    Eigen::Index input_dim() const;
    Eigen::Index output_dim() const;
    // Number of affine maps.
    std::size_t depth() const { return layers.size(); }
    // Number of ReLU layers.
    std::size_t hidden_depth() const { return layers.empty() ? 0 : layers.size() - 1; }
    // Largest hidden layer; 0 for a single affine map.
    Eigen::Index width() const;

    void validate() const;
};

struct RecurrentLayer {
    Matrix A;  // recurrent
    Matrix B;  // input
    Vector c;
};

struct RecurrentNet {
    Matrix P;  // W x d_x
    std::vector<RecurrentLayer> layers;
    Matrix Q;  // d_y x W
    std::optional<double> output_clip;

    Eigen::Index width() const { return P.rows(); }
    std::size_t depth() const { return layers.size(); }
    Eigen::Index input_dim() const { return P.cols(); }
    Eigen::Index output_dim() const { return Q.rows(); }

    void validate() const;
};

// Units with active[i] get ReLU, the rest are linear.
struct ActivationMask {
    std::vector<bool> active;

    static ActivationMask full(Eigen::Index W) { return {std::vector<bool>(W, true)}; }
    static ActivationMask none(Eigen::Index W) { return {std::vector<bool>(W, false)}; }

    Eigen::Index size() const { return static_cast<Eigen::Index>(active.size()); }
    bool operator[](Eigen::Index i) const { return active[static_cast<std::size_t>(i)]; }
    bool is_full() const;
    bool is_empty() const;
    bool operator==(const ActivationMask&) const = default;
};

struct ModifiedRecurrentNet {
    Matrix P;
    std::vector<RecurrentLayer> layers;
    std::vector<ActivationMask> masks;
    Matrix Q;
    std::optional<double> output_clip;

    Eigen::Index width() const { return P.rows(); }
    std::size_t depth() const { return layers.size(); }
    Eigen::Index input_dim() const { return P.cols(); }
    Eigen::Index output_dim() const { return Q.rows(); }

    static ModifiedRecurrentNet from_rnn(const RecurrentNet& net);
    void validate() const;
};

// Many sequences of equal length evaluated together: steps[t-1] is d x batch.
struct SequenceBatch {
    std::vector<SequenceMatrix> steps;

    std::size_t length() const { return steps.size(); }
    Eigen::Index dim() const { return steps.empty() ? 0 : steps.front().rows(); }
    Eigen::Index size() const { return steps.empty() ? 0 : steps.front().cols(); }

    static SequenceBatch from_sequences(const std::vector<TokenSequence>& xs);
    TokenSequence sequence(Eigen::Index b) const;
};

Vector eval_fnn(const FeedforwardNet& net, const Vector& x);
// Columns of X are independent inputs.
SequenceMatrix eval_fnn_batch(const FeedforwardNet& net, const SequenceMatrix& X);

SequenceMatrix eval_rnn(const RecurrentNet& net, const TokenSequence& X);
SequenceMatrix eval_mrnn(const ModifiedRecurrentNet& net, const TokenSequence& X);

std::vector<SequenceMatrix> eval_rnn_batch(const RecurrentNet& net, const SequenceBatch& X);
std::vector<SequenceMatrix> eval_mrnn_batch(const ModifiedRecurrentNet& net, const SequenceBatch& X);

}  // namespace rnn_surgery
