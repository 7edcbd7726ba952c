#pragma once

#include "rnn_surgery/bounds.hpp"
#include "rnn_surgery/network.hpp"

namespace rnn_surgery {

// Linear MRNN of width (d_x+1)K and depth N whose output at step t0 is
// rows * vec(x[1:t0]), one accumulator per row. rows is K x (d_x t0).
ModifiedRecurrentNet accumulator_mrnn(const Matrix& rows, Eigen::Index d_x, Eigen::Index t0, Eigen::Index N);

// MRNN of width (d_x+1)W and depth N+L with output[t0] = fnn(vec(x[1:t0])) for
// every real X. A single affine map (L = 1) counts as width d_y.
ModifiedRecurrentNet fnn_to_mrnn(const FeedforwardNet& fnn, Eigen::Index t0, Eigen::Index N);

// Shift-and-scale removal of the masks: width W+1, depth 2L. Agreement is
// guaranteed on the given domain, for steps 1..domain.length().
RecurrentNet mrnn_to_rnn(const ModifiedRecurrentNet& mrnn, const InputDomain& domain);

// Shift and scale picked for one MRNN layer.
struct DemaskParameters {
    double z0;     // carried by the extra unit
    double delta;
    Vector offset;  // per-unit shift, each in (0, z0]
};
std::vector<DemaskParameters> demask_parameters(const ModifiedRecurrentNet& mrnn, const InputDomain& domain);

// Unrolls the first t0 steps into an FNN over vec(x[1:t0]) with hidden width
// (2t0-1)W and t0 L ReLU layers (plus the final affine readout). Exact for all
// real inputs. Clipped nets must go through materialize_clip first.
FeedforwardNet rnn_to_fnn(const RecurrentNet& rnn, Eigen::Index t0, Eigen::Index N);

// mrnn_to_rnn(fnn_to_mrnn(...)) on [0,1]^{d_x x N}.
RecurrentNet fnn_to_rnn(const FeedforwardNet& fnn, Eigen::Index t0, Eigen::Index N);

}  // namespace rnn_surgery
