#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "p300/data_model.hpp"
#include "p300/evaluation.hpp"
#include "p300/rng.hpp"
#include "p300/synthgen.hpp"

namespace p300::test {

// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("p300_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

// Groups of `channels` rows with label pattern given per group; row values
// are i.i.d. normal.
inline ChannelSubtrialDataset noise_dataset(int n_target, int n_nontarget, int channels,
                                            Index dim, std::uint64_t seed) {
  ChannelSubtrialDataset ds;
  ds.n_channels = channels;
  const int groups = n_target + n_nontarget;
  ds.X = random_matrix(static_cast<Index>(groups) * channels, dim, seed);
  for (int g = 0; g < groups; ++g) {
    const int label = g < n_target ? kTarget : kNonTarget;
    for (int c = 0; c < channels; ++c) {
      ds.y.push_back(label);
      ds.group_id.push_back(g);
      ds.channel_index.push_back(c);
    }
  }
  return ds;
}

// noise_dataset with target rows moved by `shift` along a fixed random unit
// direction, so the classes are separable to a tunable degree.
inline ChannelSubtrialDataset shifted_dataset(int n_target, int n_nontarget, int channels,
                                              Index dim, double shift, std::uint64_t seed) {
  auto ds = noise_dataset(n_target, n_nontarget, channels, dim, seed);
  Vector direction = random_matrix(dim, 1, seed ^ 0x5eedULL).col(0);
  direction.normalize();
  for (Index i = 0; i < ds.rows(); ++i) {
    if (ds.y[static_cast<std::size_t>(i)] == kTarget) ds.X.row(i) += shift * direction.transpose();
  }
  return ds;
}

// Synthetic oddball session turned into a dataset with the default pipeline
// preprocessing.
inline ChannelSubtrialDataset synthetic_dataset(const SynthConfig& cfg,
                                                const PreprocessConfig& pre = {}) {
  const auto session = generate_oddball(cfg);
  return prepare_dataset(session.recording, session.log, pre);
}

}  // namespace p300::test
