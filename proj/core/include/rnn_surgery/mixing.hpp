#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rnn_surgery/network.hpp"

namespace rnn_surgery::regression {

enum class MixingKind { iid, exponential_mixing };

std::string to_string(MixingKind kind);
MixingKind mixing_kind_from_string(const std::string& s);

// Probit-transformed Gaussian AR(1) per coordinate:
//   z_1 ~ N(0,1),  z_t = rho z_{t-1} + sqrt(1 - rho^2) eta_t,  x_t = Phi(z_t).
// Marginals are exactly uniform; rho = 0 gives iid tokens.
struct MixingConfig {
    MixingKind kind = MixingKind::iid;
    double rho = 0.0;
    Eigen::Index d_x = 1;
    std::uint64_t seed = 0;

    // iid ignores rho
    double effective_rho() const { return kind == MixingKind::iid ? 0.0 : rho; }
    void validate() const;
};

struct GeneratedSequence {
    SequenceMatrix tokens;  // d_x x n, in [0,1]
    SequenceMatrix latent;  // the Gaussian chain behind them
};

GeneratedSequence gen_sequence_with_latent(const MixingConfig& cfg, Eigen::Index n);
SequenceMatrix gen_sequence(const MixingConfig& cfg, Eigen::Index n);

// Same generator driven by a caller-owned engine (used for Monte Carlo draws).
SequenceMatrix gen_sequence(const MixingConfig& cfg, Eigen::Index n, std::mt19937_64& rng);
SequenceMatrix gen_latent(const MixingConfig& cfg, Eigen::Index n, std::mt19937_64& rng);

double normal_cdf(double z);
double normal_quantile(double p);

// Independent stream for one (seed, n, replication) cell of an experiment.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Kolmogorov-Smirnov statistics and 1% critical values (asymptotic).
double ks_uniform(std::vector<double> sample);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_critical_1pct(std::size_t n);
double ks_critical_1pct(std::size_t n, std::size_t m);

}  // namespace rnn_surgery::regression
