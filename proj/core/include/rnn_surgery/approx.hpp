#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rnn_surgery/network.hpp"

namespace rnn_surgery::approx {

// f^{(t)} : [0,1]^{d_x x t} -> R^{d_y}, called on vec(x[1:t]).
struct PastDependentTarget {
    int t = 1;
    Eigen::Index d_x = 1;
    Eigen::Index d_y = 1;
    std::function<Vector(const Vector&)> fn;
    double beta = 1.0;  // smoothness
    double K = 1.0;     // bound on |f| and on the Hölder constant
    std::string name;

    Eigen::Index input_dim() const { return d_x * t; }
    Vector operator()(const Vector& x) const { return fn(x); }
    void validate() const;
};

struct ApproxBudget {
    int J = 1;    // grid parameter: product net uses base J+1
    int I_d = 1;  // depth parameter: levels of the squaring cascade

    void validate() const;
};

// Width 3, depth 2; emits exactly 1 at step t0 and 0 elsewhere.
RecurrentNet indicator_rnn(Eigen::Index t0, Eigen::Index N, Eigen::Index d_x);

// Token-wise clip to [-K, K]; width 4 d_y, depth 1.
RecurrentNet trunc_net(double K, Eigen::Index d_y);

// Token-wise approximate product u * v for u in [-K,K]^{d_y}, v in [0,1].
// Input is (u, v) of dimension d_y + 1. Width 3 d_y (J+2) + 1, depth I_d.
RecurrentNet product_net(double K, const ApproxBudget& budget, Eigen::Index d_y);
// Guaranteed sup error of product_net on its input box.
double product_error_bound(double K, const ApproxBudget& budget);

struct HolderApproximation {
    FeedforwardNet net;
    int resolution = 0;
    int grid_points = 0;        // per axis, used for measured_error
    double measured_error = 0;  // sup over that grid
    double error_bound = 0;     // K * D * h^min(beta,1)
};

// Continuous piecewise-linear interpolant of the target on the Kuhn
// (Freudenthal) triangulation of a uniform grid with `resolution` cells per
// axis, written as an exact ReLU FNN of depth D+1 with D = d_x * t0.
HolderApproximation holder_fnn(const PastDependentTarget& target, int resolution, Eigen::Index t0, Eigen::Index N);

// The assembled net together with the per-step ingredients.
struct SequenceApproximation {
    RecurrentNet net;
    std::vector<HolderApproximation> steps;
    double product_error = 0;
};

// Sum over t of product(trunc(fnn_to_rnn(holder_t)), indicator_t).
SequenceApproximation assemble_sequence_approximator(const std::vector<PastDependentTarget>& targets,
                                                     const ApproxBudget& budget, int resolution);

inline constexpr double kMaxGridPoints = 1e7;

// max over the tensor grid on [0,1]^{d_x x t} of |net(X)[t] - f(x[1:t])|_inf.
double sup_error_on_grid(const RecurrentNet& net, const PastDependentTarget& target, int points_per_axis);
double sup_error_on_grid(const FeedforwardNet& net, const PastDependentTarget& target, int points_per_axis);

// Built-in targets by name: constant, last-token, mean, mean-sinusoid,
// mean-parabola, abs-kink, product-wave.
PastDependentTarget catalog_target(const std::string& name, int t, Eigen::Index d_x, double K);
std::vector<std::string> catalog_names();
// The two-step demo: f1 = x1, f2 = (x1 + x2) / 2.
std::vector<PastDependentTarget> two_step_demo();

}  // namespace rnn_surgery::approx
