#include "rnn_surgery/conversion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rnn_surgery/binomial.hpp"
#include "rnn_surgery/errors.hpp"

namespace rnn_surgery {

namespace {

void check_time(Eigen::Index t0, Eigen::Index N) {
    if (N < 1) throw DimensionError("sequence length must be at least 1");
    if (t0 < 1 || t0 > N)
        throw DimensionError("t0 = " + std::to_string(t0) + " outside [1, " + std::to_string(N) + "]");
}

}  // namespace

ModifiedRecurrentNet accumulator_mrnn(const Matrix& rows, Eigen::Index d_x, Eigen::Index t0, Eigen::Index N) {
    check_time(t0, N);
    if (d_x < 1 || rows.cols() != d_x * t0)
        throw DimensionError("accumulator rows must have d_x * t0 columns");
    if (N > kMaxBinomialOrder)
        throw OverflowError("sequence length " + std::to_string(N) + " exceeds the binomial order limit");

    const Eigen::Index K = rows.rows();
    const Eigen::Index block = d_x + 1;
    const Eigen::Index W = block * K;
    const IntMatrix inv = binom_inverse(static_cast<int>(N));

    ModifiedRecurrentNet net;
    net.P = Matrix::Zero(W, d_x);
    for (Eigen::Index k = 0; k < K; ++k) net.P.block(k * block, 0, d_x, d_x).setIdentity();

    for (Eigen::Index l = 0; l < N; ++l) {
        RecurrentLayer layer{Matrix::Zero(W, W), Matrix::Zero(W, W), Vector::Zero(W)};
        for (Eigen::Index k = 0; k < K; ++k) {
            const Eigen::Index x0 = k * block;
            const Eigen::Index acc = x0 + d_x;
            layer.B.block(x0, x0, d_x, d_x).setIdentity();
            layer.A(acc, acc) = 1.0;
            layer.B(acc, acc) = 1.0;
            // b_l = sum_j inv(N - t0 + j, l) * A[j]; both indices 0-based here.
            for (Eigen::Index j = 0; j < t0; ++j) {
                const double w = static_cast<double>(inv(N - t0 + j, l));
                layer.B.block(acc, x0, 1, d_x) += w * rows.block(k, j * d_x, 1, d_x);
            }
        }
        net.layers.push_back(std::move(layer));
        net.masks.push_back(ActivationMask::none(W));
    }

    net.Q = Matrix::Zero(K, W);
    for (Eigen::Index k = 0; k < K; ++k) net.Q(k, k * block + d_x) = 1.0;
    return net;
}

ModifiedRecurrentNet fnn_to_mrnn(const FeedforwardNet& fnn, Eigen::Index t0, Eigen::Index N) {
    fnn.validate();
    check_time(t0, N);
    if (fnn.input_dim() % t0 != 0)
        throw DimensionError("FNN input dim " + std::to_string(fnn.input_dim()) + " is not a multiple of t0");
    const Eigen::Index d_x = fnn.input_dim() / t0;
    const std::size_t L = fnn.depth();
    const Eigen::Index d_y = fnn.output_dim();
    const Eigen::Index Wf = L == 1 ? d_y : fnn.width();

    const Matrix& A1 = fnn.layers[0].weight;
    ModifiedRecurrentNet acc = accumulator_mrnn(A1, d_x, t0, N);
    const Eigen::Index block = d_x + 1;
    const Eigen::Index W = block * Wf;

    // Widen to (d_x+1) * Wf; the accumulator net only has A1.rows() blocks.
    ModifiedRecurrentNet net;
    net.P = Matrix::Zero(W, d_x);
    net.P.topRows(acc.P.rows()) = acc.P;
    for (std::size_t l = 0; l < acc.layers.size(); ++l) {
        RecurrentLayer layer{Matrix::Zero(W, W), Matrix::Zero(W, W), Vector::Zero(W)};
        const Eigen::Index w = acc.width();
        layer.A.topLeftCorner(w, w) = acc.layers[l].A;
        layer.B.topLeftCorner(w, w) = acc.layers[l].B;
        net.layers.push_back(std::move(layer));
        net.masks.push_back(ActivationMask::none(W));
    }

    // Layer N+1 gathers the accumulators and adds the first bias.
    {
        RecurrentLayer layer{Matrix::Zero(W, W), Matrix::Zero(W, W), Vector::Zero(W)};
        const Eigen::Index rows = A1.rows();
        for (Eigen::Index k = 0; k < rows; ++k) layer.B(k, k * block + d_x) = 1.0;
        layer.c.head(rows) = fnn.layers[0].bias;
        net.layers.push_back(std::move(layer));
        net.masks.push_back(L == 1 ? ActivationMask::none(W) : ActivationMask::full(W));
    }
    if (L == 1) {
        net.Q = Matrix::Zero(d_y, W);
        net.Q.leftCols(d_y).setIdentity();
        return net;
    }

    // Hidden FNN layers 2..L-1 as token-wise ReLU layers.
    for (std::size_t l = 1; l + 1 < L; ++l) {
        const auto& f = fnn.layers[l];
        RecurrentLayer layer{Matrix::Zero(W, W), Matrix::Zero(W, W), Vector::Zero(W)};
        layer.B.topLeftCorner(f.weight.rows(), f.weight.cols()) = f.weight;
        layer.c.head(f.bias.size()) = f.bias;
        net.layers.push_back(std::move(layer));
        net.masks.push_back(ActivationMask::full(W));
    }

    // Layer N+L is linear: carry h_{L-1} plus a constant unit, then Q applies
    // the last affine map.
    const auto& last = fnn.layers.back();
    const Eigen::Index h = last.weight.cols();
    RecurrentLayer layer{Matrix::Zero(W, W), Matrix::Zero(W, W), Vector::Zero(W)};
    layer.B.topLeftCorner(h, h).setIdentity();
    layer.c[h] = 1.0;
    net.layers.push_back(std::move(layer));
    net.masks.push_back(ActivationMask::none(W));

    net.Q = Matrix::Zero(d_y, W);
    net.Q.leftCols(h) = last.weight;
    net.Q.col(h) = last.bias;
    return net;
}

std::vector<DemaskParameters> demask_parameters(const ModifiedRecurrentNet& mrnn, const InputDomain& domain) {
    const BoundTrace trace = bound_propagate(mrnn, domain);
    const Eigen::Index W = mrnn.width();
    std::vector<DemaskParameters> out;
    for (std::size_t l = 0; l < mrnn.depth(); ++l) {
        const double z0 = trace.max_activation(l) + 1.0;
        const auto& mask = mrnn.masks[l];
        // Per unit, the most negative value that must survive the ReLU before
        // scaling: the drive always, the full preactivation on linear units.
        Vector need = Vector::Zero(W);
        for (std::size_t t = 0; t < trace.drive[l].size(); ++t) {
            const auto& drive = trace.drive[l][t];
            const auto& pre = trace.preactivation[l][t];
            for (Eigen::Index i = 0; i < W; ++i) {
                need[i] = std::max(need[i], -drive.lo[i]);
                if (!mask[i]) need[i] = std::max(need[i], -pre.lo[i]);
            }
        }
        if (!need.allFinite() || !std::isfinite(z0))
            throw DomainError("layer " + std::to_string(l + 1) + " has unbounded activations on the domain");
        const double worst = need.maxCoeff();
        double delta = 1.0;
        int halvings = 0;
        while (z0 - delta * worst < 0.0) {
            delta *= 0.5;
            if (++halvings > 1100) throw DomainError("no admissible scale found");
        }
        // Shifting every unit by the full z0 costs eps * z0 of precision on
        // small units; each unit only needs its own bound plus the margin.
        Vector offset = (delta * need).array() + 1.0;
        offset = offset.cwiseMin(z0);
        out.push_back({z0, delta, std::move(offset)});
    }
    return out;
}

RecurrentNet mrnn_to_rnn(const ModifiedRecurrentNet& mrnn, const InputDomain& domain) {
    mrnn.validate();
    const auto params = demask_parameters(mrnn, domain);
    const Eigen::Index W = mrnn.width();
    const Eigen::Index W1 = W + 1;

    RecurrentNet net;
    net.P = Matrix::Zero(W1, mrnn.input_dim());
    net.P.topRows(W) = mrnn.P;
    net.output_clip = mrnn.output_clip;

    // prev_map turns the previous RNN state (W+1 units) back into MRNN values;
    // for the embedding it is [I 0].
    Matrix prev_map = Matrix::Zero(W, W1);
    prev_map.leftCols(W).setIdentity();

    for (std::size_t l = 0; l < mrnn.depth(); ++l) {
        const auto& layer = mrnn.layers[l];
        const auto& mask = mrnn.masks[l];
        const double z0 = params[l].z0;
        const double delta = params[l].delta;
        const Vector& offset = params[l].offset;

        // R1: offset + delta * (B u + c) on every unit; last unit holds z0.
        RecurrentLayer r1{Matrix::Zero(W1, W1), Matrix::Zero(W1, W1), Vector::Constant(W1, z0)};
        r1.B.topRows(W) = delta * (layer.B * prev_map);
        r1.c.head(W) = offset + delta * layer.c;

        // Map from this layer's RNN state to the MRNN state.
        Matrix M = Matrix::Zero(W, W1);
        Vector row_scale(W);
        RecurrentLayer r2{Matrix::Zero(W1, W1), Matrix::Zero(W1, W1), Vector::Zero(W1)};
        for (Eigen::Index i = 0; i < W; ++i) {
            if (mask[i]) {
                M(i, i) = 1.0;
                row_scale[i] = 1.0;
                r2.B(i, i) = 1.0 / delta;
                r2.c[i] = -offset[i] / delta;
            } else {
                M(i, i) = 1.0 / delta;
                M(i, W) = -(offset[i] / z0) / delta;  // unit W carries z0
                row_scale[i] = delta;
                r2.B(i, i) = 1.0;
            }
        }
        r2.B(W, W) = 1.0;
        r2.A.topRows(W) = row_scale.asDiagonal() * (layer.A * M);

        net.layers.push_back(std::move(r1));
        net.layers.push_back(std::move(r2));
        prev_map = std::move(M);
    }
    net.Q = mrnn.Q * prev_map;
    return net;
}

FeedforwardNet rnn_to_fnn(const RecurrentNet& rnn, Eigen::Index t0, Eigen::Index N) {
    rnn.validate();
    check_time(t0, N);
    if (rnn.output_clip)
        throw DimensionError("rnn_to_fnn: net has an output clip; apply materialize_clip first");
    const Eigen::Index W = rnn.width();
    const Eigen::Index d_x = rnn.input_dim();
    const Eigen::Index rows = (2 * t0 - 1) * W;
    const Matrix I = Matrix::Identity(W, W);

    // Linear map feeding the first block of the current layer: token-wise P
    // for layer 1, the previous layer's readout afterwards.
    Matrix feed = Matrix::Zero(t0 * W, t0 * d_x);
    for (Eigen::Index j = 0; j < t0; ++j) feed.block(j * W, j * d_x, W, d_x) = rnn.P;

    FeedforwardNet fnn;
    for (const auto& layer : rnn.layers) {
        // First block on segments u[1..t0]: (B u1 + c, +-u2, ..., +-u_t0).
        Matrix F1 = Matrix::Zero(rows, t0 * W);
        Vector b1 = Vector::Zero(rows);
        F1.block(0, 0, W, W) = layer.B;
        b1.head(W) = layer.c;
        for (Eigen::Index j = 1; j < t0; ++j) {
            F1.block((2 * j - 1) * W, j * W, W, W) = I;
            F1.block(2 * j * W, j * W, W, W) = -I;
        }
        fnn.layers.push_back({F1 * feed, std::move(b1)});

        // Steps 2..t0; layout before step i has 2(i-2) carried blocks, R[i-1],
        // then sign-split inputs for steps i..t0.
        for (Eigen::Index i = 2; i <= t0; ++i) {
            Matrix F = Matrix::Zero(rows, rows);
            Vector b = Vector::Zero(rows);
            const Eigen::Index done = 2 * (i - 2) * W;
            F.topLeftCorner(done, done).setIdentity();
            const Eigen::Index r = done;  // R[i-1]
            F.block(r, r, W, W) = I;
            F.block(r + W, r, W, W) = -I;
            F.block(r + 2 * W, r, W, W) = layer.A;
            F.block(r + 2 * W, r + W, W, W) = layer.B;
            F.block(r + 2 * W, r + 2 * W, W, W) = -layer.B;
            b.segment(r + 2 * W, W) = layer.c;
            const Eigen::Index rest = rows - (r + 3 * W);
            F.bottomRightCorner(rest, rest).setIdentity();
            fnn.layers.push_back({std::move(F), std::move(b)});
        }

        // Readout (linear): R[j] = s+ - s- for j < t0, R[t0] directly.
        Matrix out = Matrix::Zero(t0 * W, rows);
        for (Eigen::Index j = 0; j + 1 < t0; ++j) {
            out.block(j * W, 2 * j * W, W, W) = I;
            out.block(j * W, (2 * j + 1) * W, W, W) = -I;
        }
        out.block((t0 - 1) * W, rows - W, W, W) = I;
        feed = std::move(out);
    }

    // Only R_L[t0] reaches the output.
    const Matrix last = feed.bottomRows(W);
    fnn.layers.push_back({rnn.Q * last, Vector::Zero(rnn.output_dim())});
    return fnn;
}

RecurrentNet fnn_to_rnn(const FeedforwardNet& fnn, Eigen::Index t0, Eigen::Index N) {
    check_time(t0, N);
    fnn.validate();
    if (fnn.input_dim() % t0 != 0)
        throw DimensionError("FNN input dim " + std::to_string(fnn.input_dim()) + " is not a multiple of t0");
    const Eigen::Index d_x = fnn.input_dim() / t0;
    return mrnn_to_rnn(fnn_to_mrnn(fnn, t0, N), InputDomain::unit_cube(d_x, N));
}

}  // namespace rnn_surgery
