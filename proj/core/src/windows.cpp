#include "rnn_surgery/windows.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery::regression {

void RegressionTask::validate() const {
    if (!f_star) throw DomainError("task has no target function");
    if (N < 1 || d_x < 1) throw DimensionError("task needs N >= 1 and d_x >= 1");
    if (!(sigma >= 0.0) || !(K > 0.0) || !(beta > 0.0)) throw DomainError("task needs sigma >= 0, K > 0, beta > 0");
}

RegressionTask make_task(const std::string& name, Eigen::Index d_x, Eigen::Index N, double sigma, double K,
                         double beta, double constant) {
    RegressionTask task{nullptr, N, d_x, sigma, beta, K, name};
    if (name == "constant") {
        task.f_star = [constant](const Vector&) { return constant; };
    } else if (name == "last-token") {
        const Eigen::Index first = d_x * (N - 1);
        task.f_star = [first](const Vector& x) { return x[first]; };
    } else if (name == "mean-sinusoid") {
        task.f_star = [K](const Vector& x) { return 0.5 * K * std::sin(2.0 * std::numbers::pi * x.mean()); };
    } else {
        throw FormatError("unknown regression target \"" + name + "\"");
    }
    task.validate();
    return task;
}

WindowSet WindowSet::slice(Eigen::Index begin, Eigen::Index count) const {
    WindowSet out;
    for (const auto& s : X.steps) out.X.steps.emplace_back(s.middleCols(begin, count));
    out.y = y.segment(begin, count);
    return out;
}

WindowSet sliding_windows(const SequenceMatrix& xs, const Vector& ys, Eigen::Index N) {
    const Eigen::Index n = xs.cols();
    if (N < 1) throw DimensionError("window length must be at least 1");
    if (n < N) throw DimensionError("sequence of length " + std::to_string(n) + " is shorter than window " +
                                    std::to_string(N));
    if (ys.size() != n) throw DimensionError("responses and tokens differ in length");
    const Eigen::Index count = n - N + 1;
    WindowSet w;
    for (Eigen::Index s = 0; s < N; ++s) w.X.steps.emplace_back(xs.middleCols(s, count));
    w.y = ys.tail(count);
    return w;
}

Sample generate_sample(const RegressionTask& task, const MixingConfig& cfg, Eigen::Index n) {
    task.validate();
    if (cfg.d_x != task.d_x) throw DimensionError("mixing config and task disagree on d_x");
    std::mt19937_64 rng(cfg.seed);
    Sample s;
    s.xs = gen_sequence(cfg, n, rng);
    s.ys = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
    std::normal_distribution<double> noise(0.0, 1.0);
    Vector window(task.d_x * task.N);
    for (Eigen::Index t = task.N; t <= n; ++t) {
        for (Eigen::Index j = 0; j < task.N; ++j) window.segment(j * task.d_x, task.d_x) = s.xs.col(t - task.N + j);
        s.ys[t - 1] = task.f_star(window) + task.sigma * noise(rng);
    }
    return s;
}

std::vector<SequenceMatrix> make_blocks(const SequenceMatrix& xs, Eigen::Index N) {
    if (N < 1) throw DimensionError("block length must be at least 1");
    std::vector<SequenceMatrix> blocks;
    for (Eigen::Index b = 0; b + N <= xs.cols(); b += N) blocks.emplace_back(xs.middleCols(b, N));
    return blocks;
}

std::vector<SequenceMatrix> make_subblocks(const std::vector<SequenceMatrix>& blocks, Eigen::Index l, Eigen::Index a) {
    if (l < 1) throw DimensionError("sub-block lag must be at least 1");
    if (a < 1 || a > l) throw DimensionError("offset a must lie in [1, l]");
    const auto n = static_cast<Eigen::Index>(blocks.size());
    std::vector<SequenceMatrix> out;
    for (Eigen::Index k = 0; k < n / l; ++k) out.push_back(blocks[static_cast<std::size_t>(a - 1 + k * l)]);
    return out;
}

}  // namespace rnn_surgery::regression
