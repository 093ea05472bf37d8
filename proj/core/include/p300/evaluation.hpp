#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p300/classifier.hpp"
#include "p300/data_model.hpp"
#include "p300/preprocess.hpp"
#include "p300/selection.hpp"

namespace p300 {

enum class NormalizeScope { PerRow, ContinuousChannel, None };

struct PreprocessConfig {
  bool filter = true;
  double bp_low_hz = kDefaultBandLowHz;
  double bp_high_hz = kDefaultBandHighHz;
  int bp_order = kDefaultBandOrder;
  bool zero_phase = true;
  double window_s = 1.0;
  NormalizeScope normalize = NormalizeScope::PerRow;
};

enum class FeatureMode { Raw, PcaExplicit, PcaForwardSelect, PcaRestrictedSelect };

std::string to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view name);
std::string to_string(NormalizeScope scope);
NormalizeScope parse_normalize_scope(std::string_view name);

struct FeatureConfig {
  FeatureMode mode = FeatureMode::Raw;
  // PcaExplicit: component indices to keep.
  std::vector<int> components;
  // PcaForwardSelect.
  int max_pool = 50;
  // PcaRestrictedSelect.
  int top_n = 5;
  // Score prefixes of the top_n components instead of selecting among them.
  bool prefix_mode = false;
  int folds = 3;
  PcaScope pca_scope = PcaScope::PerFold;
};

struct PipelineConfig {
  std::string label;
  PreprocessConfig preprocess;
  FeatureConfig features;
  ClassifierSpec classifier;
  int n_repetitions = 20;
  double test_fraction = 0.2;
  bool balance = true;
  // Redraw the balanced subset each repetition instead of once per dataset.
  bool rebalance_per_repetition = true;
  std::uint64_t seed = 0;
  // Worker threads for repetitions. Results do not depend on it.
  int jobs = 1;

  // ConfigError on inconsistent settings.
  void validate() const;
};

struct RepetitionResult {
  int index = 0;
  std::optional<double> accuracy;
  std::optional<double> channel_accuracy;
  std::vector<int> chosen_components;
  std::optional<SelectionResult> selection;
  int n_train_subtrials = 0;
  int n_test_subtrials = 0;
  std::optional<std::string> error_kind;
  std::string error_message;
};

struct EvalReport {
  PipelineConfig config;
  std::vector<RepetitionResult> repetitions;
  // Mean over repetitions that produced an accuracy; unset if none did.
  std::optional<double> mean_accuracy;
  std::optional<double> mean_channel_accuracy;
  std::map<std::string, int> error_tallies;
};

// Per-subtrial decision from per-row class scores. Each channel votes for its
// argmax class; the majority wins; a tied vote goes to the class with the
// larger summed score, then to the lower class index. Groups are returned in
// order of first appearance. GroupError if a group does not have exactly
// channel_count rows.
struct VoteResult {
  std::vector<int> group_ids;
  // Winning column index of the score matrix for each group.
  std::vector<int> winners;
};

VoteResult vote_aggregate(const Matrix& channel_scores, std::span<const int> group_ids,
                          int channel_count = 8);

// Fraction of equal entries. DimError on empty or mismatched input.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

// Filter the continuous recording, slice windows and normalize, as configured.
ChannelSubtrialDataset prepare_dataset(const Recording& rec, const StimulusLog& log,
                                       const PreprocessConfig& config);

// Called with the subtrial group ids that feed each fitted stage ("balance",
// "pca", "selection", "classifier") and the held-out ids ("test").
// Must be thread-safe when jobs > 1.
using FitObserver =
    std::function<void(int repetition, std::string_view stage, std::span<const int> groups)>;

EvalReport run_experiment(const ChannelSubtrialDataset& ds, const PipelineConfig& config,
                          const FitObserver& observer = {});

}  // namespace p300
