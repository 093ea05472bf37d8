#include <algorithm>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "p300/data_model.hpp"
#include "p300/errors.hpp"
#include "p300/rng.hpp"

namespace p300 {
namespace {

Recording ramp_recording(int channels, Index samples, double fs) {
  Recording rec;
  rec.sampling_rate_hz = fs;
  rec.samples.resize(channels, samples);
  for (int c = 0; c < channels; ++c) {
    rec.channel_names.push_back("c" + std::to_string(c));
    for (Index t = 0; t < samples; ++t) rec.samples(c, t) = 1000.0 * c + static_cast<double>(t);
  }
  return rec;
}

StimulusLog evenly_spaced(int count, std::int64_t step, std::int64_t first = 0) {
  StimulusLog log;
  for (int i = 0; i < count; ++i) {
    log.onsets.push_back(first + i * step);
    log.labels.push_back(i % 4 == 0 ? kTarget : kNonTarget);
  }
  return log;
}

std::multiset<std::vector<double>> row_multiset(const Matrix& X) {
  std::multiset<std::vector<double>> rows;
  for (Index r = 0; r < X.rows(); ++r) {
    std::vector<double> v(static_cast<std::size_t>(X.cols()));
    for (Index c = 0; c < X.cols(); ++c) v[static_cast<std::size_t>(c)] = X(r, c);
    rows.insert(v);
  }
  return rows;
}

TEST(Rng, DeriveSeedSeparatesPurposesAndIndices) {
  EXPECT_NE(derive_seed(1, "split"), derive_seed(1, "balance"));
  EXPECT_NE(derive_seed(1, "split", 0), derive_seed(1, "split", 1));
  EXPECT_NE(derive_seed(1, "split"), derive_seed(2, "split"));
  EXPECT_EQ(derive_seed(7, "x", 3), derive_seed(7, "x", 3));
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(42);
  double sum = 0, sq = 0, usum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    usum += u;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
  EXPECT_NEAR(usum / n, 0.5, 0.005);
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (const int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Recording, ValidateRejectsDuplicateNames) {
  auto rec = ramp_recording(2, 10, 10.0);
  rec.channel_names[1] = rec.channel_names[0];
  EXPECT_THROW(rec.validate(), SchemaError);
}

TEST(StimulusLog, BoundaryArithmetic) {
  StimulusLog log;
  log.onsets = {2304};
  log.labels = {1};
  EXPECT_NO_THROW(log.validate(2560, 256));  // 2304 + 256 == 2560
  EXPECT_THROW(log.validate(2559, 256), RangeError);
  log.onsets = {2400};
  EXPECT_THROW(log.validate(2560, 256), RangeError);  // 2656 > 2560
  EXPECT_THROW(log.validate(2500, 256), RangeError);
  EXPECT_NO_THROW(log.validate(2656, 256));
}

TEST(StimulusLog, RejectsBadLabelsAndOrder) {
  StimulusLog log;
  log.onsets = {0, 5};
  log.labels = {0, 2};
  EXPECT_THROW(log.validate(100, 10), SchemaError);
  log.labels = {0, 1};
  log.onsets = {5, 5};
  EXPECT_THROW(log.validate(100, 10), SchemaError);
}

TEST(Slice, ShapesFromStudySetups) {
  const auto rec256 = ramp_recording(8, 80 * 256 + 256, 256.0);
  const auto ds = slice_channel_subtrials(rec256, evenly_spaced(80, 256));
  EXPECT_EQ(ds.X.rows(), 640);
  EXPECT_EQ(ds.X.cols(), 256);

  const auto rec240 = ramp_recording(8, 180 * 240 + 240, 240.0);
  const auto ds240 = slice_channel_subtrials(rec240, evenly_spaced(180, 240));
  EXPECT_EQ(ds240.X.rows(), 1440);
  EXPECT_EQ(ds240.X.cols(), 240);
}

TEST(Slice, SingleChannelSingleOnsetIsVerbatim) {
  const auto rec = ramp_recording(1, 600, 256.0);
  StimulusLog log;
  log.onsets = {17};
  log.labels = {1};
  const auto ds = slice_channel_subtrials(rec, log);
  ASSERT_EQ(ds.X.rows(), 1);
  ASSERT_EQ(ds.X.cols(), 256);
  for (Index t = 0; t < 256; ++t) EXPECT_EQ(ds.X(0, t), rec.samples(0, 17 + t));
}

TEST(Slice, RowOrderAndRoundTrip) {
  const auto rec = ramp_recording(3, 200, 20.0);
  const auto log = evenly_spaced(5, 30, 7);
  const auto ds = slice_channel_subtrials(rec, log);
  ASSERT_EQ(ds.rows(), 15);
  for (int i = 0; i < 5; ++i) {
    for (int c = 0; c < 3; ++c) {
      const auto r = static_cast<std::size_t>(i * 3 + c);
      EXPECT_EQ(ds.group_id[r], i);
      EXPECT_EQ(ds.channel_index[r], c);
      EXPECT_EQ(ds.y[r], log.labels[static_cast<std::size_t>(i)]);
      for (Index t = 0; t < 20; ++t) {
        ASSERT_EQ(ds.X(static_cast<Index>(r), t), rec.samples(c, log.onsets[i] + t));
      }
    }
  }
  EXPECT_NO_THROW(ds.validate());
}

TEST(Slice, WindowPastEndIsRangeError) {
  const auto rec = ramp_recording(2, 100, 20.0);
  StimulusLog log;
  log.onsets = {90};
  log.labels = {0};
  EXPECT_THROW(slice_channel_subtrials(rec, log), RangeError);
}

TEST(Balance, StudyCounts) {
  const auto ds = test::noise_dataset(20, 60, 8, 4, 1);
  const auto out = balance_classes(ds, 5);
  EXPECT_EQ(out.rows(), 320);
  const auto labels = out.group_labels();
  EXPECT_EQ(std::count(labels.begin(), labels.end(), kTarget), 20);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), kNonTarget), 20);
  // Every target subtrial is kept.
  auto groups = out.groups();
  for (int g = 0; g < 20; ++g) EXPECT_NE(std::find(groups.begin(), groups.end(), g), groups.end());
  EXPECT_NO_THROW(out.validate());
}

TEST(Balance, BalancedInputUnchangedAsMultiset) {
  const auto ds = test::noise_dataset(30, 30, 8, 3, 2);
  const auto out = balance_classes(ds, 11);
  EXPECT_EQ(row_multiset(out.X), row_multiset(ds.X));
}

TEST(Balance, DeterministicAndBalancedForManySeeds) {
  const auto ds = test::noise_dataset(7, 19, 4, 2, 3);
  const auto a = balance_classes(ds, 8);
  const auto b = balance_classes(ds, 8);
  EXPECT_EQ(a.group_id, b.group_id);
  EXPECT_TRUE(a.X == b.X);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto out = balance_classes(ds, seed);
    const auto n_target = std::count(out.y.begin(), out.y.end(), kTarget);
    EXPECT_EQ(2 * n_target, static_cast<long>(out.y.size()));
    const auto gl = out.group_labels();
    EXPECT_EQ(2 * std::count(gl.begin(), gl.end(), kTarget), static_cast<long>(gl.size()));
  }
}

TEST(Balance, EmptyClassThrows) {
  const auto ds = test::noise_dataset(0, 5, 2, 2, 4);
  EXPECT_THROW(balance_classes(ds, 0), EmptyClassError);
}

TEST(Split, FortyBalancedSubtrials) {
  const auto ds = test::noise_dataset(20, 20, 8, 2, 5);
  const auto split = grouped_split(ds, 0.2, 17);
  EXPECT_EQ(split.train.n_groups(), 32u);
  EXPECT_EQ(split.test.n_groups(), 8u);
  const auto tl = split.test.group_labels();
  EXPECT_EQ(std::count(tl.begin(), tl.end(), kTarget), 4);
  const auto trl = split.train.group_labels();
  EXPECT_EQ(std::count(trl.begin(), trl.end(), kTarget), 16);
  EXPECT_NO_THROW(split.train.validate());
  EXPECT_NO_THROW(split.test.validate());
  EXPECT_EQ(split.train.rows(), 256);
  EXPECT_EQ(split.test.rows(), 64);
}

TEST(Split, Disjoint) {
  const auto ds = test::noise_dataset(13, 21, 8, 2, 6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto split = grouped_split(ds, 0.2, seed);
    auto train = split.train.groups();
    auto test = split.test.groups();
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    std::vector<int> both;
    std::set_intersection(train.begin(), train.end(), test.begin(), test.end(),
                          std::back_inserter(both));
    EXPECT_TRUE(both.empty());
    EXPECT_EQ(train.size() + test.size(), 34u);
  }
}

TEST(Split, SixSubtrialEnumeration) {
  // Three subtrials per class; round(0.2 * 3) = 1 test subtrial per class,
  // so the only admissible test sets are {t, n} pairs: 3 * 3 = 9 of them.
  const auto ds = test::noise_dataset(3, 3, 8, 2, 7);
  std::set<std::vector<int>> admissible;
  for (int t = 0; t < 3; ++t) {
    for (int n = 3; n < 6; ++n) admissible.insert({t, n});
  }
  std::set<std::vector<int>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto split = grouped_split(ds, 0.2, seed);
    auto test = split.test.groups();
    std::sort(test.begin(), test.end());
    ASSERT_TRUE(admissible.count(test)) << "seed " << seed;
    seen.insert(test);
  }
  // Every admissible partition is reachable.
  EXPECT_EQ(seen.size(), admissible.size());
}

TEST(Split, SeedsOneAndTwoDiffer) {
  const auto ds = test::noise_dataset(30, 30, 8, 2, 8);
  const auto a = grouped_split(ds, 0.2, 1).test.groups();
  const auto b = grouped_split(ds, 0.2, 2).test.groups();
  EXPECT_NE(a, b);
  EXPECT_EQ(a.size(), b.size());
}

TEST(Split, DegenerateFractionsThrow) {
  const auto ds = test::noise_dataset(2, 2, 8, 2, 9);
  EXPECT_THROW(grouped_split(ds, 0.1, 0), SplitError);  // round(0.2) = 0 per class
  EXPECT_THROW(grouped_split(ds, 0.0, 0), SplitError);
  EXPECT_THROW(grouped_split(ds, 1.0, 0), SplitError);
}

TEST(KFold, StratifiedCoverAndErrors) {
  const auto ds = test::noise_dataset(7, 8, 2, 2, 10);
  const auto folds = grouped_kfold(ds, 3, 4);
  ASSERT_EQ(folds.size(), 3u);
  std::vector<int> all;
  for (const auto& f : folds) {
    int targets = 0;
    for (const int g : f) targets += g < 7;
    EXPECT_GE(targets, 2);
    EXPECT_LE(targets, 3);
    all.insert(all.end(), f.begin(), f.end());
  }
  std::sort(all.begin(), all.end());
  for (int g = 0; g < 15; ++g) EXPECT_EQ(all[static_cast<std::size_t>(g)], g);
  EXPECT_THROW(grouped_kfold(test::noise_dataset(2, 5, 2, 2, 1), 3, 0), SplitError);
}

TEST(Dataset, ValidateCatchesRaggedGroups) {
  auto ds = test::noise_dataset(2, 2, 4, 2, 11);
  ds.group_id[3] = 1;
  EXPECT_THROW(ds.validate(), GroupError);
}

TEST(RecordingIo, RoundTripIsLossless) {
  test::TempDir dir;
  Recording rec;
  rec.sampling_rate_hz = 256.0;
  rec.channel_names = {"Fz", "Cz"};
  rec.samples = test::random_matrix(2, 600, 12) * 1e-3;
  rec.samples(0, 0) = 0.1 + 0.2;  // not representable in 15 digits
  const auto log = evenly_spaced(2, 256, 3);
  save_recording(rec, log, dir / "r.csv");
  const auto back = load_recording(dir / "r.csv");
  EXPECT_TRUE(back.recording.samples == rec.samples);
  EXPECT_EQ(back.recording.channel_names, rec.channel_names);
  EXPECT_EQ(back.recording.sampling_rate_hz, 256.0);
  EXPECT_EQ(back.log.onsets, log.onsets);
  EXPECT_EQ(back.log.labels, log.labels);
}

TEST(RecordingIo, ShapeOfEightChannelFile) {
  test::TempDir dir;
  const auto rec = ramp_recording(8, 2560, 256.0);
  save_recording(rec, evenly_spaced(10, 230), dir / "r.csv");
  const auto back = load_recording(dir / "r.csv");
  EXPECT_EQ(back.recording.n_channels(), 8);
  EXPECT_EQ(back.recording.n_timepoints(), 2560);
  EXPECT_EQ(back.log.size(), 10u);
}

TEST(RecordingIo, Errors) {
  test::TempDir dir;
  {
    std::ofstream(dir / "bad.csv") << "t,a\n0,1\n";
    std::ofstream(dir / "bad.json") << R"({"sampling_rate_hz": 10, "onsets": [], "labels": []})";
    EXPECT_THROW(load_recording(dir / "bad.csv"), ParseError);
  }
  {
    std::ofstream(dir / "dup.csv") << "time,a,a\n0,1,2\n";
    std::ofstream(dir / "dup.json") << R"({"sampling_rate_hz": 1, "onsets": [], "labels": []})";
    EXPECT_THROW(load_recording(dir / "dup.csv"), SchemaError);
  }
  {
    std::ofstream out(dir / "late.csv");
    out << "time,a\n";
    for (int t = 0; t < 2500; ++t) out << t << ",0\n";
    std::ofstream(dir / "late.json")
        << R"({"sampling_rate_hz": 256, "onsets": [2400], "labels": [1]})";
    out.close();
    EXPECT_THROW(load_recording(dir / "late.csv"), RangeError);
  }
  {
    std::ofstream(dir / "num.csv") << "time,a\n0,abc\n";
    std::ofstream(dir / "num.json") << R"({"sampling_rate_hz": 1, "onsets": [], "labels": []})";
    EXPECT_THROW(load_recording(dir / "num.csv"), ParseError);
  }
  EXPECT_THROW(load_recording(dir / "missing.csv"), IOError);
}

}  // namespace
}  // namespace p300
