#include "rnn_surgery/theory.hpp"

#include <algorithm>
#include <cmath>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery::regression {

std::string to_string(MixingCase c) {
    switch (c) {
        case MixingCase::iid: return "iid";
        case MixingCase::exp_mixing: return "exp_mixing";
        default: return "alg_mixing";
    }
}

MixingCase mixing_case_from_string(const std::string& s) {
    if (s == "iid") return MixingCase::iid;
    if (s == "exp_mixing" || s == "exponential_mixing") return MixingCase::exp_mixing;
    if (s == "alg_mixing") return MixingCase::alg_mixing;
    throw FormatError("unknown schedule case \"" + s + "\"");
}

double covering_bound(double W, double L, double K, double n, double delta) {
    if (!(W > 0 && L > 0 && K > 0 && n > 0 && delta > 0))
        throw DomainError("covering_bound needs positive W, L, K, n, delta");
    if (!(delta < K * n)) throw DomainError("covering_bound needs delta < K n (log argument must exceed 1)");
    return W * W * L * L * std::log(std::max({W, L, 2.0})) * std::log(K * n / delta);
}

namespace {

void check(const ScheduleParams& p) {
    if (!(p.beta > 0.0) || p.d_x < 1 || p.N < 1) throw DomainError("schedule needs beta > 0, d_x >= 1, N >= 1");
    if (p.kind == MixingCase::alg_mixing && !(p.r > 0.0)) throw DomainError("algebraic mixing order must be positive");
}

}  // namespace

double alpha_upper(const ScheduleParams& p) {
    check(p);
    const double dN = static_cast<double>(p.d_x * p.N);
    if (p.kind == MixingCase::alg_mixing)
        return p.r * dN / ((2.0 * p.r + 2.0) * dN + (4.0 * p.r + 8.0) * p.beta);
    return dN / (2.0 * dN + 4.0 * p.beta);
}

double rate_exponent(const ScheduleParams& p) {
    check(p);
    const double dN = static_cast<double>(p.d_x * p.N);
    if (p.kind == MixingCase::alg_mixing)
        return -2.0 * p.r * p.beta / ((p.r + 1.0) * dN + (2.0 * p.r + 4.0) * p.beta);
    return -2.0 * p.beta / (dN + 2.0 * p.beta);
}

Schedule theory_schedule(double n, const ScheduleParams& p) {
    if (!(n > 1.0)) throw DomainError("schedule needs n > 1");
    const double e = alpha_upper(p);
    if (!(p.alpha >= 0.0 && p.alpha <= e + 1e-12))
        throw DomainError("alpha = " + std::to_string(p.alpha) + " outside [0, " + std::to_string(e) + "]");
    const double alpha = std::min(p.alpha, e);
    const double ln = std::log(n);
    Schedule s;
    s.W = static_cast<Eigen::Index>(std::ceil(std::pow(n, alpha) * ln));
    s.L = static_cast<Eigen::Index>(std::ceil(std::pow(n, e - alpha) * ln));
    s.depth_exponent = e;
    s.rate_exponent = rate_exponent(p);
    return s;
}

}  // namespace rnn_surgery::regression
