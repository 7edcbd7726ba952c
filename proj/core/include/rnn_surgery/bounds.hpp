#pragma once

#include <vector>

#include "rnn_surgery/network.hpp"

namespace rnn_surgery {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return lo <= v && v <= hi; }
    double magnitude() const;
};

struct IntervalVector {
    Vector lo;
    Vector hi;

    Eigen::Index size() const { return lo.size(); }
    Interval operator[](Eigen::Index i) const { return {lo[i], hi[i]}; }
    bool contains(const Vector& v) const;
};

// Per-entry box for an input sequence of length N.
struct InputDomain {
    SequenceMatrix lo;  // d_x x N
    SequenceMatrix hi;

    static InputDomain uniform(Eigen::Index d_x, Eigen::Index N, Interval range);
    static InputDomain unit_cube(Eigen::Index d_x, Eigen::Index N) {
        return uniform(d_x, N, {0.0, 1.0});
    }
    Eigen::Index dim() const { return lo.rows(); }
    Eigen::Index length() const { return lo.cols(); }
};

// Indexed [layer][time], every entry a per-unit interval vector.
//   drive:         B u[t] + c        (input part only)
//   preactivation: A h[t-1] + B u[t] + c
//   activation:    h[t] after the (masked) ReLU
struct BoundTrace {
    std::vector<std::vector<IntervalVector>> drive;
    std::vector<std::vector<IntervalVector>> preactivation;
    std::vector<std::vector<IntervalVector>> activation;

    // max |h| over all times and units of one layer
    double max_activation(std::size_t layer) const;
};

// Interval arithmetic intersected with affine forms over vec(X) (ReLUs that
// straddle zero get the usual triangle relaxation). Both are widened at every
// product so the result stays sound under rounding.
BoundTrace bound_propagate(const ModifiedRecurrentNet& net, const InputDomain& domain);
BoundTrace bound_propagate(const RecurrentNet& net, const InputDomain& domain);

}  // namespace rnn_surgery
