#include <random>

#include <benchmark/benchmark.h>

#include "rnn_surgery/approx.hpp"
#include "rnn_surgery/conversion.hpp"
#include "rnn_surgery/training.hpp"
#include "rnn_surgery/windows.hpp"

using namespace rnn_surgery;

namespace {

RecurrentNet random_rnn(Eigen::Index d_x, Eigen::Index W, std::size_t L, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto net = regression::init_network(d_x, W, L, 1.0, rng);
    net.output_clip.reset();
    return net;
}

SequenceBatch random_batch(Eigen::Index d_x, Eigen::Index N, Eigen::Index B) {
    SequenceBatch X;
    for (Eigen::Index t = 0; t < N; ++t) X.steps.push_back((SequenceMatrix::Random(d_x, B).array() + 1.0) * 0.5);
    return X;
}

FeedforwardNet random_fnn(Eigen::Index in, Eigen::Index W, int L) {
    FeedforwardNet f;
    Eigen::Index prev = in;
    for (int l = 0; l < L; ++l) {
        const Eigen::Index out = l + 1 == L ? 1 : W;
        f.layers.push_back({Matrix::Random(out, prev), Vector::Random(out)});
        prev = out;
    }
    return f;
}

}  // namespace

static void BM_EvalRnnBatch(benchmark::State& state) {
    const auto W = state.range(0);
    const auto net = random_rnn(2, W, 3, 1);
    const auto X = random_batch(2, 8, 256);
    for (auto _ : state) benchmark::DoNotOptimize(eval_rnn_batch(net, X));
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_EvalRnnBatch)->Arg(8)->Arg(32)->Arg(128);

static void BM_RnnToFnn(benchmark::State& state) {
    const auto net = random_rnn(2, 16, 3, 2);
    const auto t0 = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(rnn_to_fnn(net, t0, 8));
}
BENCHMARK(BM_RnnToFnn)->Arg(2)->Arg(8);

static void BM_FnnToRnn(benchmark::State& state) {
    const auto N = state.range(0);
    const auto f = random_fnn(2 * N, 8, 3);
    for (auto _ : state) benchmark::DoNotOptimize(fnn_to_rnn(f, N, N));
}
BENCHMARK(BM_FnnToRnn)->Arg(2)->Arg(5)->Arg(9);

static void BM_MrnnToRnn(benchmark::State& state) {
    const auto m = ModifiedRecurrentNet::from_rnn(random_rnn(1, state.range(0), 3, 3));
    const auto domain = InputDomain::unit_cube(1, 6);
    for (auto _ : state) benchmark::DoNotOptimize(mrnn_to_rnn(m, domain));
}
BENCHMARK(BM_MrnnToRnn)->Arg(8)->Arg(64);

static void BM_TrainingEpoch(benchmark::State& state) {
    const auto task = regression::make_task("mean-sinusoid", 1, 2, 0.1, 1.0);
    const auto sample = regression::generate_sample(task, {regression::MixingKind::iid, 0.0, 1, 5}, state.range(0));
    const auto windows = regression::sliding_windows(sample.xs, sample.ys, 2);
    std::mt19937_64 rng(4);
    const auto net = regression::init_network(1, 30, 7, 1.0, rng);
    RecurrentNet grad;
    for (auto _ : state) benchmark::DoNotOptimize(regression::loss_and_gradient(net, windows.X, windows.y, &grad));
}
BENCHMARK(BM_TrainingEpoch)->Arg(256)->Arg(2048);

static void BM_AssembleApproximator(benchmark::State& state) {
    std::vector<approx::PastDependentTarget> ts;
    for (int t = 1; t <= 3; ++t) ts.push_back(approx::catalog_target("mean-parabola", t, 1, 1.0));
    const int r = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(approx::assemble_sequence_approximator(ts, {3, 3}, r));
}
BENCHMARK(BM_AssembleApproximator)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
