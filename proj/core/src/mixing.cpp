#include "rnn_surgery/mixing.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery::regression {

std::string to_string(MixingKind kind) {
    return kind == MixingKind::iid ? "iid" : "exponential_mixing";
}

MixingKind mixing_kind_from_string(const std::string& s) {
    if (s == "iid") return MixingKind::iid;
    if (s == "exponential_mixing" || s == "exp_mixing") return MixingKind::exponential_mixing;
    throw FormatError("unknown mixing kind \"" + s + "\"");
}

void MixingConfig::validate() const {
    if (d_x < 1) throw DimensionError("d_x must be positive");
    if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0, 1)");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile needs p in (0, 1)");
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, p);
}

SequenceMatrix gen_latent(const MixingConfig& cfg, Eigen::Index n, std::mt19937_64& rng) {
    cfg.validate();
    if (n < 1) throw DimensionError("sequence length must be at least 1");
    const double rho = cfg.effective_rho();
    const double innov = std::sqrt(1.0 - rho * rho);
    std::normal_distribution<double> eta(0.0, 1.0);
    SequenceMatrix z(cfg.d_x, n);
    for (Eigen::Index i = 0; i < cfg.d_x; ++i) z(i, 0) = eta(rng);
    for (Eigen::Index t = 1; t < n; ++t)
        for (Eigen::Index i = 0; i < cfg.d_x; ++i) z(i, t) = rho * z(i, t - 1) + innov * eta(rng);
    return z;
}

GeneratedSequence gen_sequence_with_latent(const MixingConfig& cfg, Eigen::Index n) {
    std::mt19937_64 rng(cfg.seed);
    GeneratedSequence g;
    g.latent = gen_latent(cfg, n, rng);
    g.tokens = g.latent.unaryExpr([](double z) { return normal_cdf(z); });
    return g;
}

SequenceMatrix gen_sequence(const MixingConfig& cfg, Eigen::Index n, std::mt19937_64& rng) {
    return gen_latent(cfg, n, rng).unaryExpr([](double z) { return normal_cdf(z); });
}

SequenceMatrix gen_sequence(const MixingConfig& cfg, Eigen::Index n) {
    return gen_sequence_with_latent(cfg, n).tokens;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(a), hi(a), lo(b), hi(b), lo(c), hi(c)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double ks_uniform(std::vector<double> sample) {
    if (sample.empty()) throw DimensionError("empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double u = std::clamp(sample[i], 0.0, 1.0);
        d = std::max({d, (i + 1) / n - u, u - i / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DimensionError("empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

// c(0.01) = sqrt(-ln(0.005) / 2) = 1.6276
double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

double ks_critical_1pct(std::size_t n, std::size_t m) {
    const double a = static_cast<double>(n);
    const double b = static_cast<double>(m);
    return 1.6276 * std::sqrt((a + b) / (a * b));
}

}  // namespace rnn_surgery::regression
