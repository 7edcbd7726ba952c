#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rnn_surgery/bounds.hpp"
#include "rnn_surgery/errors.hpp"

using namespace rnn_surgery;

TEST_CASE("bound_propagate on a cumulative sum") {
    RecurrentNet net{Matrix::Ones(1, 1), {RecurrentLayer{Matrix::Ones(1, 1), Matrix::Ones(1, 1), Vector::Zero(1)}},
                     Matrix::Ones(1, 1), std::nullopt};
    const auto b = bound_propagate(net, InputDomain::unit_cube(1, 3));
    const auto h3 = b.activation[0][2][0];
    CHECK(h3.lo <= 0.0);
    CHECK(h3.lo >= -1e-12);
    CHECK(h3.hi >= 3.0);
    CHECK(h3.hi <= 3.0 + 1e-12);
    CHECK(b.max_activation(0) == doctest::Approx(3.0));
}

TEST_CASE("linear cancellation is tracked exactly") {
    // unit 2 adds and subtracts the same token every step
    RecurrentNet net;
    net.P = Matrix::Ones(2, 1);
    Matrix A = Matrix::Identity(2, 2);
    Matrix B(2, 2);
    B << 1, 0, 1, -1;
    net.layers.push_back({A, B, Vector::Zero(2)});
    net.Q = Matrix::Ones(1, 2);
    auto m = ModifiedRecurrentNet::from_rnn(net);
    m.masks[0] = ActivationMask::none(2);
    const auto b = bound_propagate(m, InputDomain::unit_cube(1, 6));
    const auto h = b.activation[0][5][1];
    CHECK(h.lo >= -1e-12);
    CHECK(h.hi <= 1e-12);
    CHECK(b.activation[0][5][0].hi == doctest::Approx(6.0));
}

TEST_CASE("zero weights give degenerate bounds") {
    Vector c(3);
    c << 0.5, -0.25, 2.0;
    RecurrentNet net{Matrix::Zero(3, 2), {RecurrentLayer{Matrix::Zero(3, 3), Matrix::Zero(3, 3), c}},
                     Matrix::Zero(1, 3), std::nullopt};
    const auto b = bound_propagate(net, InputDomain::unit_cube(2, 4));
    for (int t = 0; t < 4; ++t) {
        const auto& a = b.activation[0][t];
        CHECK(a.lo[0] == 0.5);
        CHECK(a.hi[0] == 0.5);
        CHECK(a.lo[1] == 0.0);
        CHECK(a.hi[1] == 0.0);
        CHECK(a.lo[2] == 2.0);
        CHECK(a.hi[2] == 2.0);
    }
}

TEST_CASE("bounds contain sampled trajectories") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        auto net = ModifiedRecurrentNet::from_rnn(oracle::random_rnn(rng, 2, 4, 3, 1));
        net.masks[1] = ActivationMask{{true, false, true, false}};
        const auto domain = InputDomain::uniform(2, 5, {-1.0, 2.0});
        const auto b = bound_propagate(net, domain);
        for (int s = 0; s < 200; ++s) {
            const auto X = oracle::random_sequence(rng, 2, 5, -1.0, 2.0);
            // walk the layers with the oracle, checking every hidden state
            std::vector<oracle::Vec> seq;
            const auto P = oracle::to_mat(net.P);
            for (const auto& x : oracle::tokens_of(X)) seq.push_back(oracle::matvec(P, x));
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                ModifiedRecurrentNet one{Matrix::Identity(4, 4), {net.layers[l]}, {net.masks[l]},
                                         Matrix::Identity(4, 4), std::nullopt};
                const auto hs = oracle::mrnn(one, seq);
                for (int t = 0; t < 5; ++t) CHECK(b.activation[l][t].contains(Eigen::Map<const Vector>(hs[t].data(), 4)));
                seq = hs;
            }
        }
    }
}

TEST_CASE("bound_propagate rejects bad domains") {
    RecurrentNet net{Matrix::Ones(1, 1), {RecurrentLayer{Matrix::Ones(1, 1), Matrix::Ones(1, 1), Vector::Zero(1)}},
                     Matrix::Ones(1, 1), std::nullopt};
    auto d = InputDomain::unit_cube(1, 2);
    d.hi(0, 1) = INFINITY;
    CHECK_THROWS_AS(bound_propagate(net, d), DomainError);
    CHECK_THROWS_AS(bound_propagate(net, InputDomain::unit_cube(2, 2)), DimensionError);
}
