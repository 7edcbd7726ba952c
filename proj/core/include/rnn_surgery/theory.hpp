#pragma once

#include <string>

#include <Eigen/Core>

namespace rnn_surgery::regression {

enum class MixingCase { iid, exp_mixing, alg_mixing };

std::string to_string(MixingCase c);
MixingCase mixing_case_from_string(const std::string& s);

// W^2 L^2 log(max(W, L, 2)) log(K n / delta), unit leading constant.
double covering_bound(double W, double L, double K, double n, double delta);

struct ScheduleParams {
    double alpha = 0.0;
    double beta = 1.0;
    Eigen::Index d_x = 1;
    Eigen::Index N = 1;
    MixingCase kind = MixingCase::exp_mixing;
    double r = 1.0;  // algebraic mixing order, alg_mixing only
};

struct Schedule {
    Eigen::Index W = 0;
    Eigen::Index L = 0;
    double depth_exponent = 0.0;  // e: L grows like n^{e - alpha} log n
    double rate_exponent = 0.0;   // excess risk ~ n^{rate_exponent}
};

// Largest admissible alpha (equals e).
double alpha_upper(const ScheduleParams& p);
// Excess-risk exponent alone.
double rate_exponent(const ScheduleParams& p);

// W = ceil(n^alpha ln n), L = ceil(n^{e - alpha} ln n).
Schedule theory_schedule(double n, const ScheduleParams& p);

}  // namespace rnn_surgery::regression
