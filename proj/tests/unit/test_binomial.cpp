#include "doctest.h"
#include "rnn_surgery/binomial.hpp"
#include "rnn_surgery/errors.hpp"

using namespace rnn_surgery;

namespace {

// Pascal's rule, no closed form.
std::int64_t choose(int n, int k) {
    if (n < 0 || k < 0 || k > n) return 0;
    std::vector<std::int64_t> row{1};
    for (int i = 1; i <= n; ++i) {
        std::vector<std::int64_t> next(i + 1, 1);
        for (int j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
        row = next;
    }
    return row[k];
}

}  // namespace

TEST_CASE("small binomial systems") {
    CHECK(binom_matrix(1)(0, 0) == 1);
    CHECK(binom_inverse(1)(0, 0) == 1);
    IntMatrix two(2, 2);
    two << 2, 1, 1, 1;
    CHECK(binom_matrix(2) == two);
    IntMatrix inv(2, 2);
    inv << 1, -1, -1, 2;
    CHECK(binom_inverse(2) == inv);
}

TEST_CASE("binomial coefficients") {
    for (int n = 0; n <= 40; ++n)
        for (int k = -1; k <= n + 1; ++k) CHECK(binomial(n, k) == choose(n, k));
    CHECK(binomial(-1, 0) == 0);
}

TEST_CASE("lambda factors as U U^T") {
    const int n = 5;
    IntMatrix U = IntMatrix::Zero(n, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (i + j <= n + 1) U(i - 1, j - 1) = choose(n - i, j - 1);
    CHECK(binom_matrix(n) == exact_product(U, U.transpose()));
}

TEST_CASE("lambda times its inverse is the identity") {
    for (int n = 1; n <= kMaxBinomialOrder; ++n) {
        const auto sys = BinomialSystem::make(n);
        CHECK(exact_product(sys.lambda, sys.lambda_inv) == IntMatrix::Identity(n, n));
    }
}

TEST_CASE("order guard") {
    CHECK_THROWS_AS(binom_matrix(0), OverflowError);
    CHECK_THROWS_AS(binom_matrix(kMaxBinomialOrder + 1), OverflowError);
    CHECK_THROWS_AS(binom_inverse(kMaxBinomialOrder + 1), OverflowError);
    IntMatrix big = IntMatrix::Constant(1, 1, std::int64_t{1} << 40);
    CHECK_THROWS_AS(exact_product(big, big), OverflowError);
}
