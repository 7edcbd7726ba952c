#include "rnn_surgery/combinators.hpp"

#include <algorithm>
#include <string>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery {

namespace detail {

Matrix block_diag(const Matrix& a, const Matrix& b) {
    Matrix m = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    m.topLeftCorner(a.rows(), a.cols()) = a;
    m.bottomRightCorner(b.rows(), b.cols()) = b;
    return m;
}

Matrix embed(const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
    Matrix out = Matrix::Zero(rows, cols);
    out.topLeftCorner(m.rows(), m.cols()) = m;
    return out;
}

}  // namespace detail

namespace {

using detail::block_diag;
using detail::embed;

Vector stack(const Vector& a, const Vector& b) {
    Vector v(a.size() + b.size());
    v << a, b;
    return v;
}

void require_unclipped(const RecurrentNet& net, const char* op) {
    if (net.output_clip)
        throw DimensionError(std::string(op) +
                             ": operand has an output clip; apply materialize_clip first");
}

}  // namespace

RecurrentNet pad(const RecurrentNet& net, Eigen::Index W2, std::size_t L2) {
    net.validate();
    const Eigen::Index W = net.width();
    if (W2 < W || L2 < net.depth())
        throw InvalidTargetError("pad target (" + std::to_string(W2) + ", " + std::to_string(L2) +
                                 ") is smaller than (" + std::to_string(W) + ", " +
                                 std::to_string(net.depth()) + ")");
    RecurrentNet out;
    out.P = embed(net.P, W2, net.input_dim());
    out.Q = embed(net.Q, net.output_dim(), W2);
    out.output_clip = net.output_clip;
    for (const auto& layer : net.layers) {
        Vector c = Vector::Zero(W2);
        c.head(W) = layer.c;
        out.layers.push_back({embed(layer.A, W2, W2), embed(layer.B, W2, W2), std::move(c)});
    }
    // Carried values are post-ReLU, hence nonnegative, so the ReLU of a carry
    // layer is the identity on them.
    Matrix carry = Matrix::Zero(W2, W2);
    carry.topLeftCorner(W, W).setIdentity();
    while (out.layers.size() < L2) out.layers.push_back({Matrix::Zero(W2, W2), carry, Vector::Zero(W2)});
    return out;
}

RecurrentNet compose(const RecurrentNet& outer, const RecurrentNet& inner) {
    outer.validate();
    inner.validate();
    require_unclipped(inner, "compose");
    if (inner.output_dim() != outer.input_dim())
        throw DimensionError("compose: inner output dim " + std::to_string(inner.output_dim()) +
                             " differs from outer input dim " + std::to_string(outer.input_dim()));
    const Eigen::Index W = std::max(inner.width(), outer.width());
    const RecurrentNet a = pad(inner, W, inner.depth());
    const RecurrentNet b = pad(outer, W, outer.depth());

    RecurrentNet out;
    out.P = a.P;
    out.layers = a.layers;
    const Matrix bridge = b.P * a.Q;
    for (std::size_t l = 0; l < b.layers.size(); ++l) {
        RecurrentLayer layer = b.layers[l];
        if (l == 0) layer.B = layer.B * bridge;
        out.layers.push_back(std::move(layer));
    }
    out.Q = b.Q;
    out.output_clip = outer.output_clip;
    return out;
}

namespace {

RecurrentNet side_by_side(const RecurrentNet& n1, const RecurrentNet& n2, Matrix Q) {
    const std::size_t L = std::max(n1.depth(), n2.depth());
    const RecurrentNet a = pad(n1, n1.width(), L);
    const RecurrentNet b = pad(n2, n2.width(), L);
    RecurrentNet out;
    out.P.resize(a.width() + b.width(), a.input_dim());
    out.P << a.P, b.P;
    for (std::size_t l = 0; l < L; ++l) {
        out.layers.push_back({block_diag(a.layers[l].A, b.layers[l].A),
                              block_diag(a.layers[l].B, b.layers[l].B),
                              stack(a.layers[l].c, b.layers[l].c)});
    }
    out.Q = std::move(Q);
    return out;
}

}  // namespace

RecurrentNet concat(const RecurrentNet& n1, const RecurrentNet& n2) {
    n1.validate();
    n2.validate();
    require_unclipped(n1, "concat");
    require_unclipped(n2, "concat");
    if (n1.input_dim() != n2.input_dim()) throw DimensionError("concat: input dims differ");
    return side_by_side(n1, n2, block_diag(n1.Q, n2.Q));
}

RecurrentNet lincomb(double c1, const RecurrentNet& n1, double c2, const RecurrentNet& n2) {
    n1.validate();
    n2.validate();
    require_unclipped(n1, "lincomb");
    require_unclipped(n2, "lincomb");
    if (n1.input_dim() != n2.input_dim() || n1.output_dim() != n2.output_dim())
        throw DimensionError("lincomb: operand dims differ");
    Matrix Q(n1.output_dim(), n1.width() + n2.width());
    Q << c1 * n1.Q, c2 * n2.Q;
    return side_by_side(n1, n2, std::move(Q));
}

RecurrentNet clip_net(double K, Eigen::Index d) {
    if (!(K > 0.0)) throw DomainError("clip bound must be positive");
    if (d < 1) throw DimensionError("clip dimension must be positive");
    // sigma(x) - sigma(-x) - sigma(x-K) + sigma(-x-K)
    const Matrix I = Matrix::Identity(d, d);
    RecurrentNet net;
    net.P.resize(4 * d, d);
    net.P << I, -I, I, -I;
    Vector c = Vector::Zero(4 * d);
    c.tail(2 * d).setConstant(-K);
    net.layers.push_back({Matrix::Zero(4 * d, 4 * d), Matrix::Identity(4 * d, 4 * d), std::move(c)});
    net.Q.resize(d, 4 * d);
    net.Q << I, -I, -I, I;
    return net;
}

RecurrentNet materialize_clip(const RecurrentNet& net) {
    if (!net.output_clip) return net;
    RecurrentNet inner = net;
    inner.output_clip.reset();
    return compose(clip_net(*net.output_clip, net.output_dim()), inner);
}

}  // namespace rnn_surgery
