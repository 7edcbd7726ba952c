#pragma once

#include "rnn_surgery/network.hpp"

namespace rnn_surgery {

// Zero-extends every layer to width W2, then appends identity-carry layers up
// to depth L2. Keeps the output clip.
RecurrentNet pad(const RecurrentNet& net, Eigen::Index W2, std::size_t L2);

// outer(inner(X)): width max(W1, W2), depth L1 + L2. The inner net must not
// carry an output clip (see materialize_clip).
RecurrentNet compose(const RecurrentNet& outer, const RecurrentNet& inner);

// Stacked outputs (n1(X), n2(X)): width W1 + W2, depth max(L1, L2).
RecurrentNet concat(const RecurrentNet& n1, const RecurrentNet& n2);

// c1 n1(X) + c2 n2(X): width W1 + W2, depth max(L1, L2).
RecurrentNet lincomb(double c1, const RecurrentNet& n1, double c2, const RecurrentNet& n2);

// Token-wise depth-1 net of width 4d computing min(max(x, -K), K) exactly on
// [-2K, 2K]; outside that range it is off by at most an ulp of x.
RecurrentNet clip_net(double K, Eigen::Index d);

// Replaces an output clip by an explicit clip_net layer so the result is an
// unclipped net usable as an inner operand or for unrolling.
RecurrentNet materialize_clip(const RecurrentNet& net);

namespace detail {
Matrix block_diag(const Matrix& a, const Matrix& b);
Matrix embed(const Matrix& m, Eigen::Index rows, Eigen::Index cols);
}  // namespace detail

}  // namespace rnn_surgery
