#include "rnn_surgery/approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rnn_surgery/combinators.hpp"
#include "rnn_surgery/conversion.hpp"
#include "rnn_surgery/errors.hpp"

namespace rnn_surgery::approx {

void PastDependentTarget::validate() const {
    if (t < 1 || d_x < 1 || d_y < 1) throw DimensionError("target dimensions must be positive");
    if (!fn) throw DomainError("target has no function");
    if (!(beta > 0.0) || !(K > 0.0)) throw DomainError("target needs beta > 0 and K > 0");
}

void ApproxBudget::validate() const {
    if (J < 1 || I_d < 1) throw DomainError("budget needs J >= 1 and I_d >= 1");
}

RecurrentNet indicator_rnn(Eigen::Index t0, Eigen::Index N, Eigen::Index d_x) {
    if (N < 1 || t0 < 1 || t0 > N) throw DimensionError("indicator: t0 outside [1, N]");
    if (d_x < 1) throw DimensionError("indicator: d_x must be positive");
    const double s = static_cast<double>(t0);
    RecurrentNet net;
    net.P = Matrix::Zero(3, d_x);
    // Layer 1 counts time in its first unit.
    RecurrentLayer counter{Matrix::Zero(3, 3), Matrix::Zero(3, 3), Vector::Zero(3)};
    counter.A(0, 0) = 1.0;
    counter.c[0] = 1.0;
    RecurrentLayer hat{Matrix::Zero(3, 3), Matrix::Zero(3, 3), Vector(3)};
    hat.B.col(0).setOnes();
    hat.c << -s + 1.0, -s, -s - 1.0;
    net.layers = {counter, hat};
    net.Q.resize(1, 3);
    net.Q << 1.0, -2.0, 1.0;
    return net;
}

RecurrentNet trunc_net(double K, Eigen::Index d_y) { return clip_net(K, d_y); }

namespace {

// Piecewise-linear pieces on [0,1] with breakpoints k/b, written as
// sum_k coef[k] * relu(z - k/b).
struct Cascade {
    int b;
    Vector zigzag;  // b-piece tent map [0,1] -> [0,1]
    Vector bump;    // interpolant of y(1-y) at the nodes j/b
};

Cascade make_cascade(int b) {
    Cascade c{b, Vector(b), Vector(b)};
    for (int k = 0; k < b; ++k) c.zigzag[k] = k == 0 ? b : 2.0 * b * (k % 2 == 0 ? 1.0 : -1.0);
    Vector slope(b);
    for (int j = 0; j < b; ++j) {
        const double y0 = static_cast<double>(j) / b;
        const double y1 = static_cast<double>(j + 1) / b;
        slope[j] = b * (y1 * (1.0 - y1) - y0 * (1.0 - y0));
    }
    for (int k = 0; k < b; ++k) c.bump[k] = k == 0 ? slope[0] : slope[k] - slope[k - 1];
    return c;
}

}  // namespace

// Each w in [0,1] is squared by the base-b cascade
//   S(w) = w - sum_s b^{-2(s-1)} bump(z_s),  z_1 = w, z_{s+1} = zigzag(z_s),
// which is the interpolant of w^2 at the nodes k / b^m. With a = (u+K)/(2K),
//   a v = 2 S((a+v)/2) - S(a)/2 - S(v)/2,   u v = 2K a v - K v.
RecurrentNet product_net(double K, const ApproxBudget& budget, Eigen::Index d_y) {
    budget.validate();
    if (!(K > 0.0)) throw DomainError("product_net: K must be positive");
    if (d_y < 1) throw DimensionError("product_net: d_y must be positive");
    const int b = budget.J + 1;
    const int m = budget.I_d;
    const Cascade cas = make_cascade(b);
    const Eigen::Index per = b + 1;  // b ramp units + accumulator
    const Eigen::Index W = 3 * d_y * per + 1;
    const Eigen::Index vcarry = W - 1;
    auto unit = [&](Eigen::Index i, int s, Eigen::Index k) { return (i * 3 + s) * per + k; };

    RecurrentNet net;
    net.P = Matrix::Zero(W, d_y + 1);
    RecurrentLayer first{Matrix::Zero(W, W), Matrix::Identity(W, W), Vector::Zero(W)};
    for (Eigen::Index i = 0; i < d_y; ++i) {
        // w_s = pu * u_i + pv * v + w0
        const double pu[3] = {1.0 / (4.0 * K), 1.0 / (2.0 * K), 0.0};
        const double pv[3] = {0.5, 0.0, 1.0};
        const double w0[3] = {0.25, 0.5, 0.0};
        for (int s = 0; s < 3; ++s) {
            for (Eigen::Index k = 0; k <= b; ++k) {
                const Eigen::Index r = unit(i, s, k);
                net.P(r, i) = pu[s];
                net.P(r, d_y) = pv[s];
                first.c[r] = w0[s] - (k < b ? static_cast<double>(k) / b : 0.0);
            }
        }
    }
    net.P(vcarry, d_y) = 1.0;
    net.layers.push_back(std::move(first));

    double scale = 1.0;  // b^{-2(level-1)}
    for (int level = 1; level < m; ++level) {
        RecurrentLayer next{Matrix::Zero(W, W), Matrix::Zero(W, W), Vector::Zero(W)};
        for (Eigen::Index i = 0; i < d_y; ++i) {
            for (int s = 0; s < 3; ++s) {
                const Eigen::Index acc = unit(i, s, b);
                for (Eigen::Index k = 0; k < b; ++k) {
                    const Eigen::Index r = unit(i, s, k);
                    for (Eigen::Index q = 0; q < b; ++q) next.B(r, unit(i, s, q)) = cas.zigzag[q];
                    next.c[r] = -static_cast<double>(k) / b;
                }
                next.B(acc, acc) = 1.0;
                for (Eigen::Index q = 0; q < b; ++q) next.B(acc, unit(i, s, q)) = -scale * cas.bump[q];
            }
        }
        next.B(vcarry, vcarry) = 1.0;
        net.layers.push_back(std::move(next));
        scale /= static_cast<double>(b) * b;
    }

    net.Q = Matrix::Zero(d_y, W);
    const double weight[3] = {4.0 * K, -K, -K};  // 2K * (2, -1/2, -1/2)
    for (Eigen::Index i = 0; i < d_y; ++i) {
        for (int s = 0; s < 3; ++s) {
            net.Q(i, unit(i, s, b)) += weight[s];
            for (Eigen::Index q = 0; q < b; ++q) net.Q(i, unit(i, s, q)) -= weight[s] * scale * cas.bump[q];
        }
        net.Q(i, vcarry) = -K;
    }
    return net;
}

double product_error_bound(double K, const ApproxBudget& budget) {
    budget.validate();
    // Each square is off by at most h^2/4 with h = b^{-I_d}; the three squares
    // enter with total weight 2K * 3. The bound is attained at u = 0, v = 1,
    // so it carries a little slack for rounding in the evaluation.
    return 1.5 * K * std::pow(static_cast<double>(budget.J + 1), -2.0 * budget.I_d) + 1e-12 * K;
}

SequenceApproximation assemble_sequence_approximator(const std::vector<PastDependentTarget>& targets,
                                                     const ApproxBudget& budget, int resolution) {
    if (targets.empty()) throw DimensionError("need at least one target");
    budget.validate();
    const auto N = static_cast<Eigen::Index>(targets.size());
    const auto& head = targets.front();
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& f = targets[i];
        f.validate();
        if (f.t != static_cast<int>(i) + 1) throw DimensionError("targets must be ordered t = 1..N");
        if (f.d_x != head.d_x || f.d_y != head.d_y || f.K != head.K)
            throw DimensionError("targets must share d_x, d_y and K");
    }
    const double K = head.K;
    const RecurrentNet mult = product_net(K, budget, head.d_y);
    const RecurrentNet clip = trunc_net(K, head.d_y);

    SequenceApproximation out;
    out.product_error = product_error_bound(K, budget);
    for (Eigen::Index t = 1; t <= N; ++t) {
        HolderApproximation h = holder_fnn(targets[static_cast<std::size_t>(t - 1)], resolution, t, N);
        const RecurrentNet step = fnn_to_rnn(h.net, t, N);
        const RecurrentNet gated = compose(mult, concat(compose(clip, step), indicator_rnn(t, N, head.d_x)));
        out.net = t == 1 ? gated : lincomb(1.0, out.net, 1.0, gated);
        out.steps.push_back(std::move(h));
    }
    return out;
}

namespace {

// Visits the tensor grid in batches; cb(batch) gets a D x B matrix of points.
template <class F>
void for_grid(Eigen::Index D, int points, F&& cb) {
    if (points < 2) throw DomainError("grid needs at least 2 points per axis");
    const double total = std::pow(static_cast<double>(points), static_cast<double>(D));
    if (total > kMaxGridPoints)
        throw GridTooLarge("grid of " + std::to_string(points) + "^" + std::to_string(D) +
                           " points exceeds the 1e7 cap; use a coarser grid");
    const auto n = static_cast<Eigen::Index>(std::llround(total));
    constexpr Eigen::Index chunk = 8192;
    std::vector<int> idx(static_cast<std::size_t>(D), 0);
    for (Eigen::Index start = 0; start < n; start += chunk) {
        const Eigen::Index B = std::min(chunk, n - start);
        SequenceMatrix pts(D, B);
        for (Eigen::Index b = 0; b < B; ++b) {
            for (Eigen::Index d = 0; d < D; ++d)
                pts(d, b) = static_cast<double>(idx[static_cast<std::size_t>(d)]) / (points - 1);
            for (std::size_t d = 0; d < idx.size(); ++d) {
                if (++idx[d] < points) break;
                idx[d] = 0;
            }
        }
        cb(pts);
    }
}

double batch_error(const SequenceMatrix& out, const SequenceMatrix& pts, const PastDependentTarget& target) {
    double worst = 0.0;
    for (Eigen::Index b = 0; b < pts.cols(); ++b) {
        const Vector f = target(pts.col(b));
        worst = std::max(worst, (out.col(b) - f).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace

double sup_error_on_grid(const RecurrentNet& net, const PastDependentTarget& target, int points_per_axis) {
    target.validate();
    if (net.input_dim() != target.d_x || net.output_dim() != target.d_y)
        throw DimensionError("net and target dimensions differ");
    double worst = 0.0;
    const Eigen::Index d_x = target.d_x;
    for_grid(target.input_dim(), points_per_axis, [&](const SequenceMatrix& pts) {
        // Output at step t only sees x[1:t], so length-t sequences suffice.
        SequenceBatch batch;
        for (int s = 0; s < target.t; ++s) batch.steps.emplace_back(pts.middleRows(s * d_x, d_x));
        const auto out = eval_rnn_batch(net, batch);
        worst = std::max(worst, batch_error(out.back(), pts, target));
    });
    return worst;
}

double sup_error_on_grid(const FeedforwardNet& net, const PastDependentTarget& target, int points_per_axis) {
    target.validate();
    if (net.input_dim() != target.input_dim() || net.output_dim() != target.d_y)
        throw DimensionError("net and target dimensions differ");
    double worst = 0.0;
    for_grid(target.input_dim(), points_per_axis, [&](const SequenceMatrix& pts) {
        worst = std::max(worst, batch_error(eval_fnn_batch(net, pts), pts, target));
    });
    return worst;
}

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

PastDependentTarget catalog_target(const std::string& name, int t, Eigen::Index d_x, double K) {
    using std::numbers::pi;
    PastDependentTarget f;
    f.t = t;
    f.d_x = d_x;
    f.name = name;
    f.beta = 1.0;
    f.K = K;
    const Eigen::Index D = d_x * t;
    if (name == "constant") {
        f.fn = [K](const Vector&) { return scalar(0.5 * K); };
    } else if (name == "last-token") {
        f.fn = [K, D, d_x](const Vector& x) { return scalar(K * x[D - d_x]); };
    } else if (name == "mean") {
        f.fn = [K](const Vector& x) { return scalar(K * x.mean()); };
    } else if (name == "mean-sinusoid") {
        // sup K/2, Lipschitz pi K in the max-norm
        f.fn = [K](const Vector& x) { return scalar(0.5 * K * std::sin(2.0 * pi * x.mean())); };
        f.K = pi * K;
    } else if (name == "mean-parabola") {
        f.fn = [K](const Vector& x) {
            const double m = x.mean();
            return scalar(K * m * (1.0 - m));
        };
    } else if (name == "abs-kink") {
        f.fn = [K](const Vector& x) { return scalar(K * std::abs(x.mean() - 0.5)); };
    } else if (name == "product-wave") {
        f.fn = [K, D](const Vector& x) {
            return scalar(K * std::sin(2.0 * pi * x[0]) * std::cos(pi * x[D - 1]));
        };
        f.K = 3.0 * pi * K;
    } else {
        throw DomainError("unknown target \"" + name + "\"");
    }
    return f;
}

std::vector<std::string> catalog_names() {
    return {"constant", "last-token", "mean", "mean-sinusoid", "mean-parabola", "abs-kink", "product-wave"};
}

std::vector<PastDependentTarget> two_step_demo() {
    PastDependentTarget f1{1, 1, 1, [](const Vector& x) { return scalar(x[0]); }, 1.0, 1.0, "two-step-1"};
    PastDependentTarget f2{2, 1, 1, [](const Vector& x) { return scalar(0.5 * (x[0] + x[1])); }, 1.0, 1.0,
                           "two-step-2"};
    return {f1, f2};
}

}  // namespace rnn_surgery::approx
