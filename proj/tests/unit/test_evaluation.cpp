#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "p300/classifier.hpp"
#include "p300/errors.hpp"
#include "p300/evaluation.hpp"
#include "p300/rng.hpp"

namespace p300 {
namespace {

std::vector<int> contiguous_groups(int groups, int channels) {
  std::vector<int> ids;
  for (int g = 0; g < groups; ++g) {
    for (int c = 0; c < channels; ++c) ids.push_back(g);
  }
  return ids;
}

// Rows that vote for class 1 get score (1 - p, p) with p > 0.5, others the
// mirror image.
Matrix votes_to_scores(const std::vector<int>& votes, const std::vector<double>& p) {
  Matrix s(static_cast<Index>(votes.size()), 2);
  for (std::size_t i = 0; i < votes.size(); ++i) {
    const double q = p[i];
    s(static_cast<Index>(i), 0) = votes[i] == 1 ? 1.0 - q : q;
    s(static_cast<Index>(i), 1) = votes[i] == 1 ? q : 1.0 - q;
  }
  return s;
}

TEST(Vote, FiveOfEightMajority) {
  const Matrix s = votes_to_scores({1, 1, 1, 1, 1, 0, 0, 0}, std::vector<double>(8, 0.6));
  const auto ids = contiguous_groups(1, 8);
  EXPECT_EQ(vote_aggregate(s, ids).winners, std::vector<int>{1});
}

TEST(Vote, Unanimity) {
  const Matrix s = votes_to_scores(std::vector<int>(8, 0), std::vector<double>(8, 0.9));
  const auto ids = contiguous_groups(1, 8);
  EXPECT_EQ(vote_aggregate(s, ids).winners, std::vector<int>{0});
}

TEST(Vote, FourFourTieGoesToLargerSummedScore) {
  // Class-1 voters at 0.75, class-0 voters at 0.6: summed probabilities
  // 4.6 for class 1 and 3.4 for class 0.
  const std::vector<int> votes = {1, 0, 1, 0, 1, 0, 1, 0};
  const std::vector<double> p = {0.75, 0.6, 0.75, 0.6, 0.75, 0.6, 0.75, 0.6};
  const Matrix s = votes_to_scores(votes, p);
  EXPECT_NEAR(s.col(1).sum(), 4.6, 1e-12);
  EXPECT_NEAR(s.col(0).sum(), 3.4, 1e-12);
  const auto ids = contiguous_groups(1, 8);
  EXPECT_EQ(vote_aggregate(s, ids).winners, std::vector<int>{1});
  EXPECT_EQ(oracle::vote_brute_force(s, 8), std::vector<int>{1});

  // Mirror: the same votes with the confident side flipped.
  const Matrix m = votes_to_scores({0, 1, 0, 1, 0, 1, 0, 1}, p);
  EXPECT_EQ(vote_aggregate(m, ids).winners, std::vector<int>{0});
}

TEST(Vote, ExactTieFallsToLowerClass) {
  const Matrix s = votes_to_scores({1, 0, 1, 0}, std::vector<double>(4, 0.7));
  const auto ids = contiguous_groups(1, 4);
  EXPECT_EQ(vote_aggregate(s, ids, 4).winners, std::vector<int>{0});
}

TEST(Vote, RandomMatricesMatchBruteForce) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 2 + trial % 3;
    const int groups = 5;
    const int channels = 8;
    Matrix s(groups * channels, K);
    for (Index i = 0; i < s.rows(); ++i) {
      for (Index k = 0; k < K; ++k) s(i, k) = rng.uniform();
    }
    s = softmax_rows(s);
    const auto got = vote_aggregate(s, contiguous_groups(groups, channels), channels);
    EXPECT_EQ(got.winners, oracle::vote_brute_force(s, channels));
  }
}

TEST(Vote, GroupsReportedInFirstAppearanceOrder) {
  Matrix s(4, 2);
  s << 0.9, 0.1, 0.2, 0.8, 0.8, 0.2, 0.3, 0.7;
  const std::vector<int> ids = {7, 3, 7, 3};
  const auto r = vote_aggregate(s, ids, 2);
  EXPECT_EQ(r.group_ids, (std::vector<int>{7, 3}));
  EXPECT_EQ(r.winners, (std::vector<int>{0, 1}));
}

TEST(Vote, SingleChannelIsArgmax) {
  const Matrix s = softmax_rows(test::random_matrix(30, 3, 5));
  std::vector<int> ids(30);
  for (int i = 0; i < 30; ++i) ids[static_cast<std::size_t>(i)] = i;
  const auto r = vote_aggregate(s, ids, 1);
  for (Index i = 0; i < 30; ++i) {
    Index at = 0;
    s.row(i).maxCoeff(&at);
    EXPECT_EQ(r.winners[static_cast<std::size_t>(i)], at);
  }
}

TEST(Vote, RaggedGroupIsError) {
  const Matrix s = Matrix::Constant(7, 2, 0.5);
  EXPECT_THROW(vote_aggregate(s, contiguous_groups(1, 7), 8), GroupError);
  const std::vector<int> short_ids = {0, 0, 0};
  EXPECT_THROW(vote_aggregate(s, short_ids, 8), GroupError);
}

TEST(Accuracy, Examples) {
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 0}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{1, 1}, std::vector<int>{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{0, 0}, std::vector<int>{1, 1}), 0.0);
  EXPECT_THROW(accuracy(std::vector<int>{1}, std::vector<int>{1, 0}), DimError);
  EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), DimError);
}

ChannelSubtrialDataset high_snr_dataset() {
  SynthConfig cfg;
  cfg.n_target = 40;
  cfg.n_nontarget = 80;
  cfg.p300_amplitude = 3.0;
  cfg.seed = 21;
  return test::synthetic_dataset(cfg);
}

// Balance, split, PCA, LDA and vote rebuilt from oracles for one repetition.
double reference_pca_lda_repetition(const ChannelSubtrialDataset& ds,
                                    const PipelineConfig& config, int rep) {
  const auto urep = static_cast<std::uint64_t>(rep);
  const auto data = balance_classes(ds, derive_seed(config.seed, "balance", urep));
  const auto split = grouped_split(data, config.test_fraction,
                                   derive_seed(config.seed, "split", urep));
  const auto pca = oracle::pca_by_gram_eigendecomposition(split.train.X);
  const auto k = static_cast<Index>(config.features.components.size());
  const Matrix basis = pca.eigenvectors.leftCols(k);
  const Matrix ztr = (split.train.X.rowwise() - pca.mean.transpose()) * basis;
  const Matrix zte = (split.test.X.rowwise() - pca.mean.transpose()) * basis;
  const auto moments = oracle::class_moments(ztr, split.train.y);
  const Matrix pooled = oracle::pooled_covariance(moments);
  Matrix delta(zte.rows(), 2);
  for (Index i = 0; i < zte.rows(); ++i) {
    delta.row(i) = oracle::lda_direct(moments, pooled, zte.row(i).transpose()).transpose();
  }
  Matrix scores = (delta.colwise() - delta.rowwise().maxCoeff()).array().exp();
  scores = scores.array().colwise() / scores.rowwise().sum().array();
  const auto winners = oracle::vote_brute_force(scores, split.test.n_channels);
  const auto labels = split.test.group_labels();
  int correct = 0;
  for (std::size_t g = 0; g < winners.size(); ++g) correct += winners[g] == labels[g];
  return static_cast<double>(correct) / static_cast<double>(winners.size());
}

TEST(Experiment, HighSnrPcaLdaMatchesReference) {
  const auto ds = high_snr_dataset();
  PipelineConfig config;
  config.features.mode = FeatureMode::PcaExplicit;
  config.features.components = {0, 1, 2};
  const auto report = run_experiment(ds, config);
  ASSERT_EQ(report.repetitions.size(), 20u);
  for (const auto& r : report.repetitions) {
    ASSERT_TRUE(r.accuracy.has_value());
    EXPECT_DOUBLE_EQ(*r.accuracy, reference_pca_lda_repetition(ds, config, r.index))
        << "repetition " << r.index;
  }
  ASSERT_TRUE(report.mean_accuracy.has_value());
  EXPECT_GE(*report.mean_accuracy, 0.9);
}

TEST(Experiment, MeanEqualsRecomputedMean) {
  const auto ds = test::shifted_dataset(20, 30, 4, 10, 0.5, 3);
  PipelineConfig config;
  config.n_repetitions = 7;
  const auto report = run_experiment(ds, config);
  double sum = 0.0;
  for (const auto& r : report.repetitions) sum += *r.accuracy;
  EXPECT_NEAR(*report.mean_accuracy, sum / 7.0, 1e-12);
  EXPECT_TRUE(report.error_tallies.empty());
  for (const auto& r : report.repetitions) {
    EXPECT_EQ(r.n_train_subtrials, 32);
    EXPECT_EQ(r.n_test_subtrials, 8);
    EXPECT_TRUE(r.channel_accuracy.has_value());
  }
}

TEST(Experiment, DeterministicAndIndependentOfJobs) {
  const auto ds = test::shifted_dataset(20, 20, 4, 12, 0.6, 4);
  PipelineConfig config;
  config.n_repetitions = 6;
  config.features.mode = FeatureMode::PcaRestrictedSelect;
  config.classifier.kind = ClassifierKind::Lr;
  const auto a = run_experiment(ds, config);
  const auto b = run_experiment(ds, config);
  config.jobs = 3;
  const auto c = run_experiment(ds, config);
  for (std::size_t i = 0; i < a.repetitions.size(); ++i) {
    EXPECT_EQ(a.repetitions[i].accuracy, b.repetitions[i].accuracy);
    EXPECT_EQ(a.repetitions[i].accuracy, c.repetitions[i].accuracy);
    EXPECT_EQ(a.repetitions[i].chosen_components, c.repetitions[i].chosen_components);
  }
  EXPECT_EQ(a.mean_accuracy, c.mean_accuracy);
}

TEST(Experiment, RawQdaTalliesSingularCovariance) {
  // 64 features against 32 training subtrials * 2 channels / 2 classes = 32
  // rows per class.
  const auto ds = test::noise_dataset(20, 20, 2, 64, 6);
  PipelineConfig config;
  config.classifier.kind = ClassifierKind::Qda;
  const auto report = run_experiment(ds, config);
  EXPECT_FALSE(report.mean_accuracy.has_value());
  ASSERT_EQ(report.error_tallies.count("SingularCovarianceError"), 1u);
  EXPECT_EQ(report.error_tallies.at("SingularCovarianceError"), 20);
  for (const auto& r : report.repetitions) {
    EXPECT_FALSE(r.accuracy.has_value());
    EXPECT_EQ(r.error_kind, std::optional<std::string>("SingularCovarianceError"));
  }
}

TEST(Experiment, NoTestGroupReachesAnyFittedStage) {
  const auto ds = test::shifted_dataset(20, 50, 4, 10, 0.8, 8);
  for (const auto mode : {FeatureMode::PcaExplicit, FeatureMode::PcaRestrictedSelect}) {
    PipelineConfig config;
    config.n_repetitions = 5;
    config.jobs = 2;
    config.features.mode = mode;
    config.features.components = {0, 1};
    std::mutex mu;
    std::map<int, std::set<int>> test_groups;
    std::map<int, std::map<std::string, std::set<int>>> stages;
    run_experiment(ds, config, [&](int rep, std::string_view stage, std::span<const int> g) {
      std::lock_guard lock(mu);
      if (stage == "test") {
        test_groups[rep].insert(g.begin(), g.end());
      } else {
        stages[rep][std::string(stage)].insert(g.begin(), g.end());
      }
    });
    for (const auto& [rep, by_stage] : stages) {
      const auto& held_out = test_groups.at(rep);
      const auto& balanced = by_stage.at("balance");
      for (const int g : held_out) EXPECT_EQ(balanced.count(g), 1u);
      for (const auto& [stage, groups] : by_stage) {
        if (stage == "balance") continue;
        for (const int g : held_out) {
          EXPECT_EQ(groups.count(g), 0u) << stage << " saw test group " << g;
        }
      }
      EXPECT_TRUE(by_stage.count("classifier"));
      EXPECT_TRUE(by_stage.count(mode == FeatureMode::PcaExplicit ? "pca" : "selection"));
    }
  }
}

TEST(Experiment, ChanceOnPureNoise) {
  const auto ds = test::noise_dataset(150, 150, 8, 16, 12);
  PipelineConfig config;
  const auto report = run_experiment(ds, config);
  // 60 test subtrials per repetition; the repetitions share a 300-subtrial
  // pool, so the band uses that pool size.
  const auto band = oracle::binomial_band(0.5, 300.0, 4.0);
  EXPECT_GT(*report.mean_accuracy, band.low);
  EXPECT_LT(*report.mean_accuracy, band.high);
}

TEST(Experiment, ConfigValidation) {
  const auto ds = test::noise_dataset(10, 10, 2, 4, 1);
  PipelineConfig config;
  config.n_repetitions = 0;
  EXPECT_THROW(run_experiment(ds, config), ConfigError);
  config = {};
  config.test_fraction = 1.5;
  EXPECT_THROW(run_experiment(ds, config), ConfigError);
  config = {};
  config.features.mode = FeatureMode::PcaExplicit;
  EXPECT_THROW(run_experiment(ds, config), ConfigError);
}

}  // namespace
}  // namespace p300
