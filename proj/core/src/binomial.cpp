#include "rnn_surgery/binomial.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery {

namespace {

__extension__ typedef __int128 wide_int;

void check_order(int n) {
    if (n < 1 || n > kMaxBinomialOrder)
        throw OverflowError("binomial system order " + std::to_string(n) + " outside [1, " +
                            std::to_string(kMaxBinomialOrder) + "]");
}

}  // namespace

std::int64_t binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    // Each partial product is itself a binomial coefficient, so the division is exact.
    wide_int c = 1;
    for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
    if (c > std::numeric_limits<std::int64_t>::max()) throw OverflowError("binomial overflow");
    return static_cast<std::int64_t>(c);
}

IntMatrix binom_matrix(int n) {
    check_order(n);
    IntMatrix m(n, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) m(i - 1, j - 1) = binomial(2 * n - i - j, n - i);
    return m;
}

IntMatrix binom_inverse(int n) {
    check_order(n);
    IntMatrix m(n, n);
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            std::int64_t s = 0;
            for (int k = 1; k <= std::min(i, j); ++k) s += binomial(n - k, n - i) * binomial(n - k, n - j);
            m(i - 1, j - 1) = ((i + j) % 2 == 0) ? s : -s;
        }
    }
    return m;
}

BinomialSystem BinomialSystem::make(int n) { return {n, binom_matrix(n), binom_inverse(n)}; }

IntMatrix exact_product(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("exact_product: inner dimensions differ");
    IntMatrix out(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            wide_int s = 0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) s += static_cast<wide_int>(a(i, k)) * b(k, j);
            if (s > std::numeric_limits<std::int64_t>::max() || s < std::numeric_limits<std::int64_t>::min())
                throw OverflowError("exact_product: entry exceeds 64 bits");
            out(i, j) = static_cast<std::int64_t>(s);
        }
    }
    return out;
}

}  // namespace rnn_surgery
