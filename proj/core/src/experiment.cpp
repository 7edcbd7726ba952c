#include "rnn_surgery/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery::regression {

WindowSet draw_independent_windows(const RegressionTask& task, Eigen::Index m, const MixingConfig& cfg) {
    task.validate();
    if (cfg.d_x != task.d_x) throw DimensionError("mixing config and task disagree on d_x");
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x3c3c));
    WindowSet w;
    w.X.steps.assign(static_cast<std::size_t>(task.N), SequenceMatrix(task.d_x, m));
    w.y.resize(m);
    Vector flat(task.d_x * task.N);
    for (Eigen::Index i = 0; i < m; ++i) {
        const SequenceMatrix x = gen_sequence(cfg, task.N, rng);
        for (Eigen::Index t = 0; t < task.N; ++t) {
            w.X.steps[static_cast<std::size_t>(t)].col(i) = x.col(t);
            flat.segment(t * task.d_x, task.d_x) = x.col(t);
        }
        w.y[i] = task.f_star(flat);
    }
    return w;
}

RiskEstimate excess_risk(const Predictor& fitted, const RegressionTask& task, Eigen::Index m, const MixingConfig& cfg) {
    if (m < 1000) throw DomainError("excess_risk needs at least 1000 Monte Carlo windows");
    const WindowSet w = draw_independent_windows(task, m, cfg);
    const Vector pred = fitted(w.X);
    if (pred.size() != m) throw DimensionError("predictor returned the wrong number of values");
    const Eigen::ArrayXd sq = (pred - w.y).array().square();
    RiskEstimate r;
    r.m = m;
    r.mean = sq.mean();
    const double var = (sq - r.mean).square().sum() / static_cast<double>(m - 1);
    r.std_error = std::sqrt(var / static_cast<double>(m));
    return r;
}

RiskEstimate excess_risk(const RecurrentNet& fitted, const RegressionTask& task, Eigen::Index m,
                         const MixingConfig& cfg) {
    return excess_risk([&fitted](const SequenceBatch& X) { return predict(fitted, X); }, task, m, cfg);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DimensionError("slope needs at least two paired points");
    double mx = 0, my = 0;
    const double k = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0 && y[i] > 0)) throw DomainError("log-log slope needs positive values");
        mx += std::log(x[i]) / k;
        my += std::log(y[i]) / k;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

RateExperimentResult rate_experiment(const RateExperimentConfig& cfg) {
    cfg.task.validate();
    cfg.mixing.validate();
    if (cfg.ns.empty() || cfg.replications < 1) throw DomainError("need at least one n and one replication");
    for (std::size_t i = 1; i < cfg.ns.size(); ++i)
        if (cfg.ns[i] <= cfg.ns[i - 1]) throw DomainError("ns must be strictly increasing");

    struct Cell {
        std::size_t ni;
        int rep;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < cfg.ns.size(); ++i)
        for (int r = 0; r < cfg.replications; ++r) cells.push_back({i, r});

    RateExperimentResult result;
    result.runs.resize(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) {
            try {
                const Eigen::Index n = cfg.ns[cells[c].ni];
                const auto rep = static_cast<std::uint64_t>(cells[c].rep);
                const auto start = std::chrono::steady_clock::now();

                const Schedule s = theory_schedule(static_cast<double>(n), cfg.schedule);
                MixingConfig mix = cfg.mixing;
                mix.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n), rep, 1);
                const Sample sample = generate_sample(cfg.task, mix, n);
                const WindowSet windows = sliding_windows(sample.xs, sample.ys, cfg.task.N);

                TrainConfig tc = cfg.train;
                tc.W = s.W;
                tc.L = static_cast<std::size_t>(s.L);
                tc.K = cfg.task.K;
                tc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n), rep, 2);
                const TrainResult fit = train_erm(cfg.task, windows, tc);

                MixingConfig mc = cfg.mixing;
                mc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n), rep, 3);
                const RiskEstimate risk = excess_risk(fit.net, cfg.task, cfg.mc_size, mc);

                RunRecord& rec = result.runs[c];
                rec.n = n;
                rec.replication = cells[c].rep;
                rec.excess_risk = risk.mean;
                rec.std_error = risk.std_error;
                rec.W = s.W;
                rec.L = s.L;
                rec.train_loss = fit.train_loss;
                rec.validation_loss = fit.validation_loss;
                rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cells.size();
            }
        }
    };

    const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cells.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
        RateRow row;
        row.n = cfg.ns[i];
        std::vector<double> risks;
        for (const auto& rec : result.runs) {
            if (rec.n != row.n) continue;
            risks.push_back(rec.excess_risk);
            row.W = rec.W;
            row.L = rec.L;
        }
        double mean = 0;
        for (double v : risks) mean += v / static_cast<double>(risks.size());
        double var = 0;
        for (double v : risks) var += (v - mean) * (v - mean);
        row.mean_risk = mean;
        row.std_risk = risks.size() > 1 ? std::sqrt(var / static_cast<double>(risks.size() - 1)) : 0.0;
        result.rows.push_back(row);
        xs.push_back(static_cast<double>(row.n));
        ys.push_back(std::max(mean, std::numeric_limits<double>::min()));
    }
    result.theoretical_exponent = rate_exponent(cfg.schedule);
    result.degenerate = std::all_of(result.rows.begin(), result.rows.end(),
                                    [](const RateRow& r) { return r.mean_risk <= 1e-3; });
    result.slope_fitted = cfg.ns.size() >= 3 && cfg.replications >= 3;
    result.slope = result.slope_fitted ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
    return result;
}

}  // namespace rnn_surgery::regression
