#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rnn_surgery/approx.hpp"
#include "rnn_surgery/combinators.hpp"
#include "rnn_surgery/conversion.hpp"
#include "rnn_surgery/errors.hpp"

using namespace rnn_surgery;
using namespace rnn_surgery::approx;

namespace {

// Evaluates a token-wise net on every (u, v) of a grid over [-K,K] x [0,1]
// and returns max |net - u v|.
double product_grid_error(const RecurrentNet& net, double K, int points) {
    SequenceMatrix pts(2, points * points);
    for (int i = 0; i < points; ++i)
        for (int j = 0; j < points; ++j) {
            pts(0, i * points + j) = -K + 2.0 * K * i / (points - 1);
            pts(1, i * points + j) = static_cast<double>(j) / (points - 1);
        }
    const auto out = eval_rnn_batch(net, SequenceBatch{{pts}});
    double worst = 0.0;
    for (Eigen::Index k = 0; k < pts.cols(); ++k)
        worst = std::max(worst, std::abs(out[0](0, k) - pts(0, k) * pts(1, k)));
    return worst;
}

TokenSequence constant_seq(Eigen::Index d, Eigen::Index n, double v) { return SequenceMatrix(SequenceMatrix::Constant(d, n, v)); }

PastDependentTarget zero_target(int t) {
    return {t, 1, 1, [](const Vector&) { return Vector::Zero(1); }, 1.0, 1.0, "zero"};
}

}  // namespace

TEST_CASE("indicator_rnn") {
    SUBCASE("t0 = 3, N = 5") {
        const auto y = eval_rnn(indicator_rnn(3, 5, 1), constant_seq(1, 5, 0.4));
        const double expect[] = {0, 0, 1, 0, 0};
        for (int t = 0; t < 5; ++t) CHECK(y(0, t) == expect[t]);
    }
    SUBCASE("single step") {
        CHECK(eval_rnn(indicator_rnn(1, 1, 2), constant_seq(2, 1, 0.9))(0, 0) == 1.0);
    }
    SUBCASE("last step of seven, independent of the tokens") {
        std::mt19937_64 rng(1);
        const auto net = indicator_rnn(7, 7, 3);
        CHECK(net.width() == 3);
        CHECK(net.depth() == 2);
        const auto y = eval_rnn(net, oracle::random_sequence(rng, 3, 7, -4, 4));
        for (int t = 0; t < 6; ++t) CHECK(y(0, t) == 0.0);
        CHECK(y(0, 6) == 1.0);
    }
    CHECK_THROWS_AS(indicator_rnn(4, 3, 1), DimensionError);
}

TEST_CASE("trunc_net") {
    const auto clip = trunc_net(1.0, 3);
    const auto y = eval_rnn(clip, SequenceMatrix(Eigen::Vector3d(2.0, -0.5, -3.0)));
    CHECK(y(0, 0) == 1.0);
    CHECK(y(1, 0) == -0.5);
    CHECK(y(2, 0) == -1.0);

    std::mt19937_64 rng(2);
    const auto one = trunc_net(0.75, 1);
    const auto X = oracle::random_sequence(rng, 1, 1000, -0.75, 0.75);
    CHECK(eval_rnn(one, X) == X.data);

    const auto twice = compose(one, one);
    const auto Z = oracle::random_sequence(rng, 1, 1000, -3, 3);
    CHECK(eval_rnn(twice, Z) == eval_rnn(one, Z));
}

TEST_CASE("truncation never increases the error to a bounded target") {
    std::mt19937_64 rng(3);
    const double K = 0.5;
    const auto clip = trunc_net(K, 1);
    for (int k = 0; k < 1000; ++k) {
        std::uniform_real_distribution<double> u(-K, K), w(-3, 3);
        const double f = u(rng), g = w(rng);
        const double c = eval_rnn(clip, constant_seq(1, 1, g))(0, 0);
        CHECK(std::abs(c - f) <= std::abs(g - f));
    }
}

TEST_CASE("product_net") {
    const ApproxBudget budget{2, 2};
    const double K = 1.0;
    const auto net = product_net(K, budget, 1);
    CHECK(net.width() == 3 * 1 * (2 + 2) + 1);
    CHECK(net.depth() == 2);
    const double bound = product_error_bound(K, budget);
    const double measured = product_grid_error(net, K, 101);
    CHECK(measured <= bound);

    SequenceMatrix uv(2, 3);
    uv << 0.0, 0.0, 0.5, 0.3, 1.0, 0.5;
    const auto y = eval_rnn(net, uv);
    CHECK(std::abs(y(0, 0)) <= bound);
    CHECK(std::abs(y(0, 1)) <= bound);
    CHECK(std::abs(y(0, 2) - 0.25) <= bound);
}

TEST_CASE("product_net refines with depth and grid") {
    double prev = INFINITY;
    for (int I_d = 1; I_d <= 4; ++I_d) {
        const double e = product_grid_error(product_net(1.0, {2, I_d}, 1), 1.0, 101);
        CHECK(e < prev);
        CHECK(e <= product_error_bound(1.0, {2, I_d}));
        prev = e;
    }
    prev = INFINITY;
    for (int J = 1; J <= 6; ++J) {
        const double e = product_grid_error(product_net(2.0, {J, 2}, 1), 2.0, 101);
        CHECK(e <= prev + 1e-12);
        CHECK(e <= product_error_bound(2.0, {J, 2}));
        prev = e;
    }
}

TEST_CASE("product_net handles several outputs") {
    const double K = 1.5;
    const auto net = product_net(K, {3, 3}, 2);
    std::mt19937_64 rng(4);
    const auto X = oracle::random_sequence(rng, 3, 200, 0, 1);
    SequenceMatrix in = X.data;
    in.topRows(2) = (X.data.topRows(2).array() * 2 * K - K).matrix();
    const auto y = eval_rnn(net, in);
    for (Eigen::Index t = 0; t < 200; ++t)
        for (int i = 0; i < 2; ++i) CHECK(std::abs(y(i, t) - in(i, t) * in(2, t)) <= product_error_bound(K, {3, 3}));
}

TEST_CASE("sup_error_on_grid") {
    SUBCASE("exact representation") {
        // mean of two tokens as an RNN: accumulate, read at t = 2
        const auto f = catalog_target("mean", 2, 1, 1.0);
        FeedforwardNet g{{AffineLayer{Matrix::Constant(1, 2, 0.5), Vector::Zero(1)}}};
        const auto r = fnn_to_rnn(g, 2, 2);
        CHECK(sup_error_on_grid(r, f, 9) <= 1e-12);
        CHECK(sup_error_on_grid(g, f, 9) <= 1e-12);
    }
    SUBCASE("zero net against a constant") {
        PastDependentTarget f{1, 1, 1, [](const Vector&) { return Vector::Constant(1, 0.3); }, 1.0, 1.0, "c"};
        RecurrentNet zero{Matrix::Zero(1, 1),
                          {RecurrentLayer{Matrix::Zero(1, 1), Matrix::Zero(1, 1), Vector::Zero(1)}},
                          Matrix::Zero(1, 1), std::nullopt};
        CHECK(sup_error_on_grid(zero, f, 5) == doctest::Approx(0.3));
    }
    SUBCASE("random sampling never beats the grid by more than the modulus") {
        // f = parabola of the mean, net = 0: the error is f itself, Lipschitz 1 in max-norm
        const auto f = catalog_target("mean-parabola", 2, 1, 1.0);
        FeedforwardNet zero{{AffineLayer{Matrix::Zero(1, 2), Vector::Zero(1)}}};
        const int points = 12;
        const double grid = sup_error_on_grid(zero, f, points);
        std::mt19937_64 rng(5);
        double mc = 0.0;
        for (int k = 0; k < 100000; ++k) mc = std::max(mc, std::abs(f(oracle::random_vector(rng, 2, 0, 1))[0]));
        CHECK(mc <= grid + 0.5 / (points - 1));
        CHECK(mc >= grid - 0.5 / (points - 1));
    }
    SUBCASE("grid cap") {
        const auto f = catalog_target("mean", 8, 1, 1.0);
        FeedforwardNet zero{{AffineLayer{Matrix::Zero(1, 8), Vector::Zero(1)}}};
        CHECK_THROWS_AS(sup_error_on_grid(zero, f, 10), GridTooLarge);
    }
}

TEST_CASE("two-step demo") {
    const auto targets = two_step_demo();
    const auto s = assemble_sequence_approximator(targets, {2, 3}, 2);
    for (const auto& f : targets) CHECK(sup_error_on_grid(s.net, f, 33) <= 0.05);
}

TEST_CASE("single-function mode") {
    const auto f = catalog_target("abs-kink", 1, 2, 1.0);
    const auto s = assemble_sequence_approximator({f}, {3, 3}, 4);
    REQUIRE(s.steps.size() == 1);
    const double e = sup_error_on_grid(s.net, f, 9);
    CHECK(e <= s.steps[0].measured_error + s.product_error + 1e-9);
}

TEST_CASE("zero targets") {
    const auto s = assemble_sequence_approximator({zero_target(1), zero_target(2), zero_target(3)}, {2, 2}, 2);
    std::mt19937_64 rng(6);
    for (int k = 0; k < 200; ++k)
        CHECK(eval_rnn(s.net, oracle::random_sequence(rng, 1, 3)).cwiseAbs().maxCoeff() <= s.product_error);
}

TEST_CASE("simultaneous approximation on three steps") {
    std::vector<PastDependentTarget> ts;
    for (int t = 1; t <= 3; ++t) ts.push_back(catalog_target("mean-parabola", t, 1, 1.0));
    const ApproxBudget budget{3, 3};
    std::vector<double> coarse;
    for (int r : {2, 4}) {
        const auto s = assemble_sequence_approximator(ts, budget, r);
        for (int t = 0; t < 3; ++t) {
            const double e = sup_error_on_grid(s.net, ts[t], 17);
            CHECK(e <= s.steps[t].measured_error + 3 * s.product_error + 1e-9);
            if (r == 2) coarse.push_back(e);
            else {
                CHECK(e <= coarse[t] + 1e-9);
                CHECK(e <= 0.05);
            }
        }
        if (r == 4) CHECK(s.net.width() <= 500);
    }
}

TEST_CASE("assembly bookkeeping") {
    const ApproxBudget budget{2, 2};
    const auto mult = product_net(1.0, budget, 1);
    const auto clip = trunc_net(1.0, 1);
    for (int N = 1; N <= 3; ++N) {
        std::vector<PastDependentTarget> ts;
        for (int t = 1; t <= N; ++t) ts.push_back(catalog_target("mean", t, 1, 1.0));
        const auto s = assemble_sequence_approximator(ts, budget, 2);
        Eigen::Index width = 0;
        std::size_t depth = 0;
        for (int t = 1; t <= N; ++t) {
            const auto step = fnn_to_rnn(s.steps[t - 1].net, t, N);
            const Eigen::Index inner = std::max(clip.width(), step.width()) + 3;
            width += std::max(mult.width(), inner);
            depth = std::max(depth, mult.depth() + std::max<std::size_t>(clip.depth() + step.depth(), 2));
        }
        CHECK(s.net.width() == width);
        CHECK(s.net.depth() == depth);
    }
}

TEST_CASE("catalog") {
    for (const auto& name : catalog_names()) {
        for (int t = 1; t <= 3; ++t) {
            const auto f = catalog_target(name, t, 2, 1.0);
            CHECK(f.input_dim() == 2 * t);
            std::mt19937_64 rng(7);
            for (int k = 0; k < 200; ++k) CHECK(std::abs(f(oracle::random_vector(rng, 2 * t, 0, 1))[0]) <= f.K);
        }
    }
    CHECK_THROWS_AS(catalog_target("nope", 1, 1, 1.0), DomainError);
}
