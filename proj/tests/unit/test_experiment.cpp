#include <cmath>

#include "doctest.h"
#include "rnn_surgery/errors.hpp"
#include "rnn_surgery/experiment.hpp"

using namespace rnn_surgery;
using namespace rnn_surgery::regression;

namespace {

Predictor from_function(const RegressionTask& task, std::function<double(const Vector&)> g) {
    return [task, g](const SequenceBatch& X) {
        Vector out(X.size());
        Vector flat(task.d_x * task.N);
        for (Eigen::Index b = 0; b < X.size(); ++b) {
            for (Eigen::Index t = 0; t < task.N; ++t) flat.segment(t * task.d_x, task.d_x) = X.steps[t].col(b);
            out[b] = g(flat);
        }
        return out;
    };
}

RateExperimentConfig small_config() {
    RateExperimentConfig cfg;
    cfg.task = make_task("constant", 1, 2, 0.0, 1.0, 1.0, 0.4);
    cfg.mixing = {MixingKind::exponential_mixing, 0.5, 1, 0};
    cfg.ns = {64, 128, 256};
    cfg.replications = 3;
    cfg.train.epochs = 300;
    cfg.train.restarts = 3;
    cfg.train.learning_rate = 1e-2;
    cfg.schedule = {0.25, 1.0, 1, 2, MixingCase::exp_mixing, 1.0};
    cfg.mc_size = 1000;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("excess risk of the truth is zero") {
    const auto task = make_task("mean-sinusoid", 2, 2, 0.1, 1.0);
    const auto r = excess_risk(from_function(task, task.f_star), task, 2000, {MixingKind::iid, 0.0, 2, 1});
    CHECK(r.mean == 0.0);
    CHECK(r.m == 2000);
}

TEST_CASE("constant gap") {
    const auto task = make_task("constant", 1, 3, 0.0, 1.0, 1.0, 0.3);
    const auto r = excess_risk(from_function(task, [](const Vector&) { return 0.0; }), task, 1000,
                               {MixingKind::exponential_mixing, 0.6, 1, 2});
    CHECK(std::abs(r.mean - 0.09) <= 3 * r.std_error + 1e-15);
}

TEST_CASE("Monte Carlo estimate is self-consistent") {
    const auto task = make_task("mean-sinusoid", 1, 2, 0.1, 1.0);
    const auto g = from_function(task, [](const Vector& x) { return 0.3 * x[1] - 0.1; });
    const auto small = excess_risk(g, task, 2000, {MixingKind::exponential_mixing, 0.8, 1, 3});
    const auto large = excess_risk(g, task, 20000, {MixingKind::exponential_mixing, 0.8, 1, 4});
    CHECK(std::abs(small.mean - large.mean) <= 3 * std::hypot(small.std_error, large.std_error));
    CHECK_THROWS_AS(excess_risk(g, task, 999, {MixingKind::iid, 0.0, 1, 3}), DomainError);
}

TEST_CASE("independent windows are stationary draws") {
    const auto task = make_task("last-token", 1, 4, 0.0, 1.0);
    const auto w = draw_independent_windows(task, 3000, {MixingKind::exponential_mixing, 0.9, 1, 6});
    CHECK(w.size() == 3000);
    std::vector<double> first(w.X.steps[0].data(), w.X.steps[0].data() + 3000);
    CHECK(ks_uniform(first) < ks_critical_1pct(first.size()));
    CHECK(w.y == w.X.steps[3].row(0).transpose());
}

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1, 2, 4, 8}, {1, 0.5, 0.25, 0.125}) == doctest::Approx(-1.0));
    CHECK(loglog_slope({10, 100}, {3, 3}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(loglog_slope({1, 2}, {1, 0}), DomainError);
}

TEST_CASE("zero-risk regime is flagged degenerate") {
    const auto r = rate_experiment(small_config());
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) CHECK(row.mean_risk <= 1e-3);
    CHECK(r.degenerate);
    CHECK(r.slope_fitted);
    CHECK(std::isfinite(r.slope));
    CHECK(r.theoretical_exponent == doctest::Approx(-0.5));
    CHECK(r.runs.size() == 9);
    CHECK(r.rows[0].n == 64);
}

TEST_CASE("results do not depend on the thread count") {
    auto cfg = small_config();
    cfg.ns = {64, 96};
    cfg.replications = 2;
    cfg.train.epochs = 40;
    cfg.threads = 1;
    const auto a = rate_experiment(cfg);
    cfg.threads = 3;
    const auto b = rate_experiment(cfg);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].n == b.runs[i].n);
        CHECK(a.runs[i].replication == b.runs[i].replication);
        CHECK(a.runs[i].excess_risk == b.runs[i].excess_risk);
        CHECK(a.runs[i].train_loss == b.runs[i].train_loss);
    }
    CHECK_FALSE(a.slope_fitted);
    CHECK(std::isnan(a.slope));
}

TEST_CASE("rate experiment preconditions") {
    auto cfg = small_config();
    cfg.ns = {128, 64, 256};
    CHECK_THROWS_AS(rate_experiment(cfg), DomainError);
}
