#include "rnn_surgery/network.hpp"

#include <algorithm>
#include <string>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery {

namespace {

std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

void check_layers(const Matrix& P, const std::vector<RecurrentLayer>& layers, const Matrix& Q,
                  const std::optional<double>& clip) {
    const Eigen::Index W = P.rows();
    if (W < 1 || P.cols() < 1) throw DimensionError("embedding P must be non-empty");
    if (layers.empty()) throw DimensionError("recurrent net needs at least one layer");
    if (Q.cols() != W || Q.rows() < 1)
        throw DimensionError("projection Q is " + shape(Q.rows(), Q.cols()) + ", width is " +
                             std::to_string(W));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.A.rows() != W || layer.A.cols() != W || layer.B.rows() != W ||
            layer.B.cols() != W || layer.c.size() != W)
            throw DimensionError("layer " + std::to_string(l + 1) + " does not match width " +
                                 std::to_string(W));
    }
    if (clip && !(*clip >= 0.0)) throw DomainError("output clip must be nonnegative");
}

void apply_clip(SequenceMatrix& Y, const std::optional<double>& clip) {
    if (clip) Y = Y.cwiseMax(-*clip).cwiseMin(*clip);
}

// Shared recurrence; mask == nullptr means ReLU everywhere.
std::vector<SequenceMatrix> run_layers(const Matrix& P, const std::vector<RecurrentLayer>& layers,
                                       const std::vector<ActivationMask>* masks, const Matrix& Q,
                                       const std::optional<double>& clip,
                                       const SequenceBatch& X) {
    if (X.dim() != P.cols())
        throw DimensionError("token dimension " + std::to_string(X.dim()) + " but net expects " +
                             std::to_string(P.cols()));
    const std::size_t N = X.length();
    const Eigen::Index W = P.rows();
    const Eigen::Index batch = X.size();

    std::vector<SequenceMatrix> h(N);
    for (std::size_t t = 0; t < N; ++t) h[t].noalias() = P * X.steps[t];

    SequenceMatrix prev(W, batch);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        const ActivationMask* mask = masks ? &(*masks)[l] : nullptr;
        const bool full = mask == nullptr || mask->is_full();
        prev.setZero();
        for (std::size_t t = 0; t < N; ++t) {
            SequenceMatrix z = layer.B * h[t];
            z.colwise() += layer.c;
            if (t > 0) z.noalias() += layer.A * prev;
            if (full) {
                prev = z.cwiseMax(0.0);
            } else {
                for (Eigen::Index i = 0; i < W; ++i)
                    if ((*mask)[i]) z.row(i) = z.row(i).cwiseMax(0.0);
                prev = std::move(z);
            }
            h[t] = prev;
        }
    }

    std::vector<SequenceMatrix> out(N);
    for (std::size_t t = 0; t < N; ++t) {
        out[t].noalias() = Q * h[t];
        apply_clip(out[t], clip);
    }
    return out;
}

SequenceMatrix gather(const std::vector<SequenceMatrix>& steps) {
    SequenceMatrix Y(steps.front().rows(), static_cast<Eigen::Index>(steps.size()));
    for (std::size_t t = 0; t < steps.size(); ++t) Y.col(static_cast<Eigen::Index>(t)) = steps[t].col(0);
    return Y;
}

SequenceBatch single(const TokenSequence& X) {
    SequenceBatch b;
    b.steps.reserve(static_cast<std::size_t>(X.length()));
    for (Eigen::Index t = 0; t < X.length(); ++t) b.steps.emplace_back(X.data.col(t));
    return b;
}

}  // namespace

TokenSequence::TokenSequence(SequenceMatrix m) : data(std::move(m)) {
    if (data.rows() < 1 || data.cols() < 1)
        throw DimensionError("token sequence must have d_x >= 1 and N >= 1");
    if (!data.allFinite()) throw DomainError("token sequence has non-finite entries");
}

Vector TokenSequence::prefix(Eigen::Index t) const {
    if (t < 1 || t > length()) throw DimensionError("prefix length out of range");
    Vector v(dim() * t);
    for (Eigen::Index s = 0; s < t; ++s) v.segment(s * dim(), dim()) = data.col(s);
    return v;
}

Eigen::Index FeedforwardNet::input_dim() const {
    return layers.empty() ? 0 : layers.front().weight.cols();
}

Eigen::Index FeedforwardNet::output_dim() const {
    return layers.empty() ? 0 : layers.back().weight.rows();
}

Eigen::Index FeedforwardNet::width() const {
    Eigen::Index w = 0;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) w = std::max(w, layers[l].weight.rows());
    return w;
}

void FeedforwardNet::validate() const {
    if (layers.empty()) throw DimensionError("feedforward net needs at least one layer");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.weight.rows() < 1 || layer.weight.cols() < 1)
            throw DimensionError("empty weight in layer " + std::to_string(l + 1));
        if (layer.bias.size() != layer.weight.rows())
            throw DimensionError("bias of layer " + std::to_string(l + 1) + " has wrong length");
        if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows())
            throw DimensionError("layer " + std::to_string(l + 1) + " expects " +
                                 std::to_string(layer.weight.cols()) + " inputs, gets " +
                                 std::to_string(layers[l - 1].weight.rows()));
    }
}

void RecurrentNet::validate() const { check_layers(P, layers, Q, output_clip); }

bool ActivationMask::is_full() const {
    return std::all_of(active.begin(), active.end(), [](bool b) { return b; });
}

bool ActivationMask::is_empty() const {
    return std::none_of(active.begin(), active.end(), [](bool b) { return b; });
}

ModifiedRecurrentNet ModifiedRecurrentNet::from_rnn(const RecurrentNet& net) {
    ModifiedRecurrentNet m{net.P, net.layers, {}, net.Q, net.output_clip};
    m.masks.assign(net.layers.size(), ActivationMask::full(net.width()));
    return m;
}

void ModifiedRecurrentNet::validate() const {
    check_layers(P, layers, Q, output_clip);
    if (masks.size() != layers.size()) throw DimensionError("one mask per layer required");
    for (const auto& m : masks)
        if (m.size() != width()) throw DimensionError("mask length differs from width");
}

SequenceBatch SequenceBatch::from_sequences(const std::vector<TokenSequence>& xs) {
    SequenceBatch b;
    if (xs.empty()) return b;
    const auto d = xs.front().dim();
    const auto N = xs.front().length();
    const auto n = static_cast<Eigen::Index>(xs.size());
    b.steps.assign(static_cast<std::size_t>(N), SequenceMatrix(d, n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& x = xs[static_cast<std::size_t>(i)];
        if (x.dim() != d || x.length() != N) throw DimensionError("ragged sequence batch");
        for (Eigen::Index t = 0; t < N; ++t) b.steps[static_cast<std::size_t>(t)].col(i) = x.data.col(t);
    }
    return b;
}

TokenSequence SequenceBatch::sequence(Eigen::Index b) const {
    SequenceMatrix m(dim(), static_cast<Eigen::Index>(length()));
    for (std::size_t t = 0; t < length(); ++t) m.col(static_cast<Eigen::Index>(t)) = steps[t].col(b);
    return TokenSequence(std::move(m));
}

Vector eval_fnn(const FeedforwardNet& net, const Vector& x) {
    SequenceMatrix X = x;
    return eval_fnn_batch(net, X).col(0);
}

SequenceMatrix eval_fnn_batch(const FeedforwardNet& net, const SequenceMatrix& X) {
    net.validate();
    if (X.rows() != net.input_dim())
        throw DimensionError("input has " + std::to_string(X.rows()) + " entries, net expects " +
                             std::to_string(net.input_dim()));
    SequenceMatrix h = X;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        SequenceMatrix z = net.layers[l].weight * h;
        z.colwise() += net.layers[l].bias;
        h = (l + 1 < net.layers.size()) ? SequenceMatrix(z.cwiseMax(0.0)) : std::move(z);
    }
    return h;
}

std::vector<SequenceMatrix> eval_rnn_batch(const RecurrentNet& net, const SequenceBatch& X) {
    net.validate();
    return run_layers(net.P, net.layers, nullptr, net.Q, net.output_clip, X);
}

std::vector<SequenceMatrix> eval_mrnn_batch(const ModifiedRecurrentNet& net, const SequenceBatch& X) {
    net.validate();
    return run_layers(net.P, net.layers, &net.masks, net.Q, net.output_clip, X);
}

SequenceMatrix eval_rnn(const RecurrentNet& net, const TokenSequence& X) {
    return gather(eval_rnn_batch(net, single(X)));
}

SequenceMatrix eval_mrnn(const ModifiedRecurrentNet& net, const TokenSequence& X) {
    return gather(eval_mrnn_batch(net, single(X)));
}

}  // namespace rnn_surgery
