#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace rnn_surgery {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr int kMaxBinomialOrder = 20;

// C(n, k), zero when k < 0, k > n or n < 0.
std::int64_t binomial(int n, int k);

// lambda(i, j) = C(2n - i - j, n - i) for 1-based i, j.
IntMatrix binom_matrix(int n);
IntMatrix binom_inverse(int n);

struct BinomialSystem {
    int n = 0;
    IntMatrix lambda;
    IntMatrix lambda_inv;

    static BinomialSystem make(int n);
};

// Integer product with 128-bit accumulation; throws OverflowError if an entry
// of the result does not fit in 64 bits.
IntMatrix exact_product(const IntMatrix& a, const IntMatrix& b);

}  // namespace rnn_surgery
