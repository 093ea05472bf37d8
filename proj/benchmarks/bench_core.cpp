#include <benchmark/benchmark.h>

#include "p300/discriminant.hpp"
#include "p300/evaluation.hpp"
#include "p300/neuralnet.hpp"
#include "p300/pca.hpp"
#include "p300/preprocess.hpp"
#include "p300/rng.hpp"
#include "p300/selection.hpp"
#include "p300/synthgen.hpp"

namespace {

using namespace p300;

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

std::vector<int> alternating(Index n) {
  std::vector<int> y;
  for (Index i = 0; i < n; ++i) y.push_back(static_cast<int>(i % 2));
  return y;
}

// A default-sized session: 40 balanced subtrials x 8 channels x 256 samples.
const ChannelSubtrialDataset& session() {
  static const ChannelSubtrialDataset ds = [] {
    SynthConfig cfg;
    const auto s = generate_oddball(cfg);
    return balance_classes(prepare_dataset(s.recording, s.log, PreprocessConfig{}), 0);
  }();
  return ds;
}

void BM_DesignBandpass(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(design_bandpass(0.23, 30.0, 4, 256.0));
}
BENCHMARK(BM_DesignBandpass);

void BM_FilterZeroPhase(benchmark::State& state) {
  const auto coeffs = design_bandpass(0.23, 30.0, 4, 256.0);
  const Matrix x = gaussian(state.range(0), 1, 1);
  const std::span<const double> signal(x.data(), static_cast<std::size_t>(x.size()));
  for (auto _ : state) benchmark::DoNotOptimize(filter_signal(coeffs, signal, true));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterZeroPhase)->Arg(256 * 60)->Arg(256 * 600);

void BM_FitPca(benchmark::State& state) {
  const Matrix X = gaussian(640, state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(X));
}
BENCHMARK(BM_FitPca)->Arg(64)->Arg(256);

void BM_FitLda(benchmark::State& state) {
  const Matrix X = gaussian(640, state.range(0), 3);
  const auto y = alternating(640);
  for (auto _ : state) benchmark::DoNotOptimize(fit_lda(X, y));
}
BENCHMARK(BM_FitLda)->Arg(5)->Arg(50);

void BM_NllGradient(benchmark::State& state) {
  const Index d = state.range(0);
  const Matrix X = gaussian(512, d, 4);
  const auto y = alternating(512);
  const std::vector<int> classes = {0, 1};
  const Matrix T = one_hot(y, classes);
  const auto w = init_network(d, d, 2, 5);
  for (auto _ : state) benchmark::DoNotOptimize(nll_loss_and_gradient(w, X, T));
}
BENCHMARK(BM_NllGradient)->Arg(5)->Arg(50);

void BM_TrainNlr(benchmark::State& state) {
  const Matrix X = gaussian(512, 5, 6);
  const auto y = alternating(512);
  ScgOptions opts;
  opts.max_iterations = static_cast<int>(state.range(0));
  opts.gradient_tolerance = 0.0;
  opts.loss_tolerance = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(train_nn(X, y, 5, opts, 7));
}
BENCHMARK(BM_TrainNlr)->Arg(50);

void BM_RestrictedSelection(benchmark::State& state) {
  const auto& ds = session();
  const ClassifierSpec lda;
  for (auto _ : state) benchmark::DoNotOptimize(restricted_forward_select(ds, lda, 5, 3, 0));
}
BENCHMARK(BM_RestrictedSelection)->Unit(benchmark::kMillisecond);

void BM_ExperimentRepetition(benchmark::State& state) {
  const auto& ds = session();
  PipelineConfig config;
  config.n_repetitions = 1;
  config.features.mode = FeatureMode::PcaRestrictedSelect;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(ds, config));
}
BENCHMARK(BM_ExperimentRepetition)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
