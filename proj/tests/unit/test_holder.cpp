#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rnn_surgery/approx.hpp"
#include "rnn_surgery/errors.hpp"

using namespace rnn_surgery;
using namespace rnn_surgery::approx;

namespace {

PastDependentTarget target(int t, Eigen::Index d_x, std::function<double(const Vector&)> f, double K = 1.0) {
    return {t, d_x, 1, [f](const Vector& x) { return Vector::Constant(1, f(x)); }, 1.0, K, "test"};
}

// Independent sup estimate on a fine grid through the plain-loop evaluator.
double dense_error(const FeedforwardNet& net, const PastDependentTarget& f, int points) {
    const Eigen::Index D = f.input_dim();
    std::vector<int> idx(D, 0);
    double worst = 0.0;
    while (true) {
        Vector x(D);
        for (Eigen::Index d = 0; d < D; ++d) x[d] = static_cast<double>(idx[d]) / (points - 1);
        worst = std::max(worst, std::abs(oracle::fnn(net, oracle::to_vec(x))[0] - f(x)[0]));
        Eigen::Index d = 0;
        while (d < D && ++idx[d] == points) idx[d++] = 0;
        if (d == D) break;
    }
    return worst;
}

}  // namespace

TEST_CASE("linear targets are reproduced") {
    const auto f = target(1, 1, [](const Vector& x) { return x[0]; });
    for (int r : {1, 3, 8}) {
        const auto h = holder_fnn(f, r, 1, 1);
        CHECK(h.measured_error <= 1e-9);
        CHECK(dense_error(h.net, f, 101) <= 1e-9);
    }
    const auto g = target(2, 2, [](const Vector& x) { return 0.25 * (x[0] - x[1] + 2 * x[2] + x[3]); });
    CHECK(holder_fnn(g, 3, 2, 2).measured_error <= 1e-9);
}

TEST_CASE("kink on a grid point") {
    const auto f = target(1, 1, [](const Vector& x) { return std::abs(x[0] - 0.5); });
    for (int r : {2, 4, 10}) {
        const auto h = holder_fnn(f, r, 1, 2);
        CHECK(dense_error(h.net, f, 1001) <= 1e-9);
    }
    CHECK(holder_fnn(f, 3, 1, 2).measured_error > 1e-3);
}

TEST_CASE("second-order convergence on a smooth target") {
    using std::numbers::pi;
    const auto f = target(2, 1, [](const Vector& x) { return std::sin(2 * pi * x[0]) * std::cos(pi * x[1]); });
    const auto h16 = holder_fnn(f, 16, 2, 2);
    const auto h32 = holder_fnn(f, 32, 2, 2);
    const double e16 = dense_error(h16.net, f, 257);
    const double e32 = dense_error(h32.net, f, 257);
    const double ratio = e16 / e32;
    MESSAGE("r=16: " << e16 << "  r=32: " << e32 << "  ratio " << ratio);
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
}

TEST_CASE("error stays under the interpolation bound and refines") {
    for (const char* name : {"mean-sinusoid", "mean-parabola", "abs-kink", "product-wave"}) {
        for (int t = 1; t <= 2; ++t) {
            const auto f = catalog_target(name, t, 1, 1.0);
            double prev = INFINITY;
            for (int r : {2, 4, 8}) {
                const auto h = holder_fnn(f, r, t, 2);
                CHECK(h.measured_error <= h.error_bound);
                CHECK(h.measured_error <= prev + 1e-9);
                CHECK(h.net.hidden_depth() == static_cast<std::size_t>(t));
                prev = h.measured_error;
            }
        }
    }
}

TEST_CASE("holder_fnn preconditions") {
    const auto f = catalog_target("mean", 2, 1, 1.0);
    CHECK_THROWS_AS(holder_fnn(f, 0, 2, 2), DomainError);
    CHECK_THROWS_AS(holder_fnn(f, 2, 1, 2), DimensionError);
    CHECK_THROWS_AS(holder_fnn(f, 2, 3, 2), DimensionError);
}
