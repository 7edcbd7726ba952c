// Simplicial interpolation as a ReLU network.
//
// On the grid with r cells per axis the Kuhn-triangulation interpolant is
//   If(x) = sum_k m_k * min_{i : k_i >= 1} rho_{i,k_i}(x_i)
// where m_k is the mixed backward difference of the node values at k and
//   rho_{i,j}(x) = relu(r x_i - (j-1)) - relu(r x_i - j)
// is the clamped ramp of cell j. The empty minimum is 1, so m_0 = f(0).
//
// Layer 1 holds relu(r x_i - j). Layer q+1 extends every length-q running
// minimum M by one coordinate: min(M, rho) = M - relu(M - rho). Partial sums
// of finished terms ride along as a (+, -) pair per output.

#include <cmath>
#include <map>
#include <string>

#include "rnn_surgery/approx.hpp"
#include "rnn_surgery/errors.hpp"

namespace rnn_surgery::approx {

namespace {

// Sparse affine expression over the units of one layer.
struct Lin {
    std::vector<std::pair<Eigen::Index, double>> terms;
    double c = 0.0;

    static Lin unit(Eigen::Index i) { return {{{i, 1.0}}, 0.0}; }

    Lin& add(const Lin& o, double s = 1.0) {
        for (auto [i, w] : o.terms) terms.emplace_back(i, s * w);
        c += s * o.c;
        return *this;
    }
};

struct Builder {
    std::vector<Lin> units;  // preactivations in terms of the previous layer

    Eigen::Index add(Lin pre) {
        units.push_back(std::move(pre));
        return static_cast<Eigen::Index>(units.size()) - 1;
    }

    AffineLayer finish(Eigen::Index prev) const {
        const auto n = static_cast<Eigen::Index>(units.size());
        AffineLayer layer{Matrix::Zero(n, prev), Vector::Zero(n)};
        for (Eigen::Index u = 0; u < n; ++u) {
            for (auto [i, w] : units[static_cast<std::size_t>(u)].terms) layer.weight(u, i) += w;
            layer.bias[u] = units[static_cast<std::size_t>(u)].c;
        }
        return layer;
    }
};

// Tuple of (coordinate, cell) pairs with increasing coordinates, flattened.
using Tuple = std::vector<int>;

Eigen::Index flat_index(const Tuple& tau, int r) {
    Eigen::Index idx = 0;
    for (std::size_t p = 0; p < tau.size(); p += 2) {
        Eigen::Index stride = 1;
        for (int i = 0; i < tau[p]; ++i) stride *= r + 1;
        idx += stride * tau[p + 1];
    }
    return idx;
}

// m_k for every node k (column k, flattened with coordinate 0 fastest).
Eigen::MatrixXd mixed_differences(const PastDependentTarget& target, Eigen::Index D, int r) {
    Eigen::Index n = 1;
    for (Eigen::Index i = 0; i < D; ++i) n *= r + 1;
    Eigen::MatrixXd g(target.d_y, n);
    std::vector<int> k(static_cast<std::size_t>(D), 0);
    Vector x(D);
    for (Eigen::Index idx = 0; idx < n; ++idx) {
        for (Eigen::Index i = 0; i < D; ++i) x[i] = static_cast<double>(k[static_cast<std::size_t>(i)]) / r;
        const Vector v = target(x);
        if (v.size() != target.d_y || !v.allFinite())
            throw DomainError("target returned a bad value at a grid node");
        g.col(idx) = v;
        for (auto& ki : k) {
            if (++ki <= r) break;
            ki = 0;
        }
    }
    Eigen::Index stride = 1;
    for (Eigen::Index i = 0; i < D; ++i) {
        // Backward difference along axis i; walk down so g(k - e_i) is still original.
        for (Eigen::Index idx = n - 1; idx >= 0; --idx)
            if ((idx / stride) % (r + 1) != 0) g.col(idx) -= g.col(idx - stride);
        stride *= r + 1;
    }
    return g;
}

}  // namespace

HolderApproximation holder_fnn(const PastDependentTarget& target, int resolution, Eigen::Index t0, Eigen::Index N) {
    target.validate();
    if (resolution < 1) throw DomainError("resolution must be at least 1");
    if (t0 < 1 || t0 > N) throw DimensionError("t0 outside [1, N]");
    if (target.t != t0) throw DimensionError("target time index differs from t0");
    const Eigen::Index D = target.input_dim();
    const int r = resolution;
    if (std::pow(r + 1.0, static_cast<double>(D)) > kMaxGridPoints)
        throw GridTooLarge("interpolation grid (" + std::to_string(r + 1) + ")^" + std::to_string(D) +
                           " is too large");

    const Eigen::MatrixXd m = mixed_differences(target, D, r);
    const Eigen::Index d_y = target.d_y;
    FeedforwardNet net;

    // Layer 1: relu(r x_i - j), j = 0..r.
    Builder b1;
    for (Eigen::Index i = 0; i < D; ++i)
        for (int j = 0; j <= r; ++j) b1.add({{{i, static_cast<double>(r)}}, -static_cast<double>(j)});
    net.layers.push_back(b1.finish(D));

    std::map<std::pair<int, int>, Lin> rho;
    for (int i = 0; i < D; ++i)
        for (int a = 1; a <= r; ++a)
            rho[{i, a}] = Lin::unit(i * (r + 1) + a - 1).add(Lin::unit(i * (r + 1) + a), -1.0);

    std::map<Tuple, Lin> mins;
    std::vector<Lin> partial(static_cast<std::size_t>(d_y));
    for (Eigen::Index o = 0; o < d_y; ++o) partial[o].c = m(o, 0);
    for (int i = 0; i < D; ++i) {
        for (int a = 1; a <= r; ++a) {
            const Tuple tau{i, a};
            mins[tau] = rho[{i, a}];
            for (Eigen::Index o = 0; o < d_y; ++o) partial[o].add(rho[{i, a}], m(o, flat_index(tau, r)));
        }
    }

    Eigen::Index prev_width = static_cast<Eigen::Index>(b1.units.size());
    for (Eigen::Index q = 1; q < D; ++q) {
        Builder b;
        std::map<Tuple, Lin> next_mins;
        std::map<std::pair<int, int>, Lin> next_rho;
        std::vector<Lin> next_partial(static_cast<std::size_t>(d_y));

        for (const auto& [tau, M] : mins) {
            const int last = tau[tau.size() - 2];
            if (last >= D - 1) continue;
            const Eigen::Index parent = b.add(M);
            for (int i = last + 1; i < D; ++i) {
                for (int a = 1; a <= r; ++a) {
                    Lin gap = M;
                    gap.add(rho.at({i, a}), -1.0);
                    const Eigen::Index g = b.add(std::move(gap));
                    Tuple ext = tau;
                    ext.push_back(i);
                    ext.push_back(a);
                    next_mins[ext] = Lin::unit(parent).add(Lin::unit(g), -1.0);
                }
            }
        }
        for (int i = static_cast<int>(q) + 1; i < D; ++i)
            for (int a = 1; a <= r; ++a) next_rho[{i, a}] = Lin::unit(b.add(rho.at({i, a})));
        for (Eigen::Index o = 0; o < d_y; ++o) {
            Lin neg;
            neg.add(partial[o], -1.0);
            const Eigen::Index pos_unit = b.add(partial[o]);
            const Eigen::Index neg_unit = b.add(std::move(neg));
            next_partial[o] = Lin::unit(pos_unit).add(Lin::unit(neg_unit), -1.0);
            for (const auto& [tau, M] : next_mins) next_partial[o].add(M, m(o, flat_index(tau, r)));
        }

        net.layers.push_back(b.finish(prev_width));
        prev_width = static_cast<Eigen::Index>(b.units.size());
        mins = std::move(next_mins);
        rho = std::move(next_rho);
        partial = std::move(next_partial);
    }

    Builder out;
    for (auto& p : partial) out.add(std::move(p));
    net.layers.push_back(out.finish(prev_width));

    HolderApproximation result;
    result.net = std::move(net);
    result.resolution = r;
    const int cap = static_cast<int>(std::floor(std::pow(kMaxGridPoints, 1.0 / static_cast<double>(D)) + 1e-9));
    result.grid_points = std::max(2, std::min(4 * r + 1, cap));
    result.measured_error = sup_error_on_grid(result.net, target, result.grid_points);
    const double h = 1.0 / r;
    result.error_bound = target.K * static_cast<double>(D) * std::pow(h, std::min(target.beta, 1.0));
    return result;
}

}  // namespace rnn_surgery::approx
