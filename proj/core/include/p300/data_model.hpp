#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace p300 {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr int kNonTarget = 0;
inline constexpr int kTarget = 1;

// Continuous multi-channel EEG. samples is n_channels x n_timepoints.
struct Recording {
  Matrix samples;
  double sampling_rate_hz = 0.0;
  std::vector<std::string> channel_names;

  Index n_channels() const { return samples.rows(); }
  Index n_timepoints() const { return samples.cols(); }

  // Throws SchemaError on any invariant violation.
  void validate() const;
};

// Stimulus onsets (sample indices) and their labels (kTarget / kNonTarget).
struct StimulusLog {
  std::vector<std::int64_t> onsets;
  std::vector<int> labels;

  std::size_t size() const { return onsets.size(); }

  // Checks labels, monotone onsets and that every window of window_samples
  // fits inside n_timepoints (RangeError otherwise).
  void validate(Index n_timepoints, Index window_samples) const;
};

// One row per (stimulus, channel): the channel's window after the onset.
// Rows sharing group_id form one subtrial and carry the same label.
struct ChannelSubtrialDataset {
  Matrix X;
  std::vector<int> y;
  std::vector<int> group_id;
  std::vector<int> channel_index;
  int n_channels = 0;

  Index rows() const { return X.rows(); }
  Index dim() const { return X.cols(); }

  // Distinct group ids in order of first appearance.
  std::vector<int> groups() const;
  // Label of each entry of groups().
  std::vector<int> group_labels() const;
  std::size_t n_groups() const { return groups().size(); }

  // Rows belonging to the given groups, in the dataset's original row order.
  ChannelSubtrialDataset subset_groups(const std::vector<int>& keep) const;

  // Every group has n_channels rows, one label and channel indices
  // 0..n_channels-1. Throws GroupError.
  void validate() const;
};

// Window length in samples; fs * window_s must be an integer (SchemaError).
Index window_samples(double sampling_rate_hz, double window_s);

struct RecordingFormat {
  // Defaults to the CSV path with its extension replaced by ".json".
  std::filesystem::path sidecar;
  double window_s = 1.0;
};

struct LoadedRecording {
  Recording recording;
  StimulusLog log;
};

std::filesystem::path sidecar_path_for(const std::filesystem::path& csv_path);

// CSV: header `time,<ch1>,...,<chN>`, one row per sample.
// Sidecar JSON: {"sampling_rate_hz": fs, "onsets": [...], "labels": [...]}.
LoadedRecording load_recording(const std::filesystem::path& csv_path,
                               const RecordingFormat& format = {});

// Writes both files using the shortest round-trip decimal form of every value.
void save_recording(const Recording& rec, const StimulusLog& log,
                    const std::filesystem::path& csv_path,
                    const std::filesystem::path& sidecar_path = {});

ChannelSubtrialDataset slice_channel_subtrials(const Recording& rec,
                                               const StimulusLog& log,
                                               double window_s = 1.0);

// Keeps every subtrial of the minority class (targets under the oddball
// paradigm) and a seeded uniform subset of the majority class of equal size.
ChannelSubtrialDataset balance_classes(const ChannelSubtrialDataset& ds,
                                       std::uint64_t seed);

struct SplitResult {
  ChannelSubtrialDataset train;
  ChannelSubtrialDataset test;
};

// Stratified split at subtrial granularity. Per class, round(test_fraction *
// n_class) subtrials go to test.
SplitResult grouped_split(const ChannelSubtrialDataset& ds, double test_fraction,
                          std::uint64_t seed);

// Stratified k-fold assignment at subtrial granularity. Returns the group ids
// of each fold. Each class's groups are shuffled and dealt round-robin.
std::vector<std::vector<int>> grouped_kfold(const ChannelSubtrialDataset& ds,
                                            int folds, std::uint64_t seed);

}  // namespace p300
