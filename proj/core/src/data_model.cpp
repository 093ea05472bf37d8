#include "p300/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "p300/errors.hpp"
#include "p300/rng.hpp"

namespace p300 {

void Recording::validate() const {
  if (n_channels() < 1 || n_timepoints() < 1) {
    throw SchemaError("recording must have at least one channel and one sample");
  }
  if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz)) {
    throw SchemaError("sampling rate must be a positive finite number");
  }
  if (static_cast<Index>(channel_names.size()) != n_channels()) {
    throw SchemaError("channel name count does not match channel count");
  }
  std::set<std::string> seen;
  for (const auto& name : channel_names) {
    if (!seen.insert(name).second) {
      throw SchemaError("duplicate channel name '" + name + "'");
    }
  }
}

void StimulusLog::validate(Index n_timepoints, Index window_samples) const {
  if (onsets.size() != labels.size()) {
    throw SchemaError("onsets and labels differ in length");
  }
  for (std::size_t i = 0; i < onsets.size(); ++i) {
    if (labels[i] != kTarget && labels[i] != kNonTarget) {
      throw SchemaError("label at position " + std::to_string(i) + " is not 0 or 1");
    }
    if (i > 0 && onsets[i] <= onsets[i - 1]) {
      throw SchemaError("onsets must be strictly increasing");
    }
    if (onsets[i] < 0) {
      throw RangeError("negative onset " + std::to_string(onsets[i]));
    }
    if (onsets[i] + window_samples > n_timepoints) {
      throw RangeError("onset " + std::to_string(onsets[i]) + " + window " +
                       std::to_string(window_samples) + " exceeds recording length " +
                       std::to_string(n_timepoints));
    }
  }
}

std::vector<int> ChannelSubtrialDataset::groups() const {
  std::vector<int> out;
  std::unordered_set<int> seen;
  for (const int g : group_id) {
    if (seen.insert(g).second) out.push_back(g);
  }
  return out;
}

std::vector<int> ChannelSubtrialDataset::group_labels() const {
  std::vector<int> out;
  std::unordered_set<int> seen;
  for (std::size_t i = 0; i < group_id.size(); ++i) {
    if (seen.insert(group_id[i]).second) out.push_back(y[i]);
  }
  return out;
}

ChannelSubtrialDataset ChannelSubtrialDataset::subset_groups(
    const std::vector<int>& keep) const {
  const std::unordered_set<int> wanted(keep.begin(), keep.end());
  std::vector<Index> rows_kept;
  for (std::size_t i = 0; i < group_id.size(); ++i) {
    if (wanted.count(group_id[i])) rows_kept.push_back(static_cast<Index>(i));
  }
  ChannelSubtrialDataset out;
  out.n_channels = n_channels;
  out.X.resize(static_cast<Index>(rows_kept.size()), X.cols());
  out.y.reserve(rows_kept.size());
  out.group_id.reserve(rows_kept.size());
  out.channel_index.reserve(rows_kept.size());
  for (std::size_t r = 0; r < rows_kept.size(); ++r) {
    const Index src = rows_kept[r];
    out.X.row(static_cast<Index>(r)) = X.row(src);
    out.y.push_back(y[static_cast<std::size_t>(src)]);
    out.group_id.push_back(group_id[static_cast<std::size_t>(src)]);
    out.channel_index.push_back(channel_index[static_cast<std::size_t>(src)]);
  }
  return out;
}

void ChannelSubtrialDataset::validate() const {
  const auto n = static_cast<std::size_t>(X.rows());
  if (y.size() != n || group_id.size() != n || channel_index.size() != n) {
    throw GroupError("dataset row bookkeeping does not match X");
  }
  if (n_channels < 1) throw GroupError("dataset must declare n_channels >= 1");
  std::unordered_map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) members[group_id[i]].push_back(i);
  for (const auto& [g, rows] : members) {
    if (static_cast<int>(rows.size()) != n_channels) {
      throw GroupError("group " + std::to_string(g) + " has " +
                       std::to_string(rows.size()) + " rows, expected " +
                       std::to_string(n_channels));
    }
    std::vector<bool> channel_seen(static_cast<std::size_t>(n_channels), false);
    for (const std::size_t r : rows) {
      if (y[r] != y[rows.front()]) {
        throw GroupError("group " + std::to_string(g) + " mixes labels");
      }
      const int c = channel_index[r];
      if (c < 0 || c >= n_channels || channel_seen[static_cast<std::size_t>(c)]) {
        throw GroupError("group " + std::to_string(g) + " has bad channel indices");
      }
      channel_seen[static_cast<std::size_t>(c)] = true;
    }
  }
}

Index window_samples(double sampling_rate_hz, double window_s) {
  if (!(window_s > 0.0) || !(sampling_rate_hz > 0.0)) {
    throw SchemaError("window length and sampling rate must be positive");
  }
  const double exact = sampling_rate_hz * window_s;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact) || rounded < 1.0) {
    throw SchemaError("window of " + std::to_string(window_s) +
                      " s is not a whole number of samples");
  }
  return static_cast<Index>(rounded);
}

ChannelSubtrialDataset slice_channel_subtrials(const Recording& rec,
                                               const StimulusLog& log,
                                               double window_s) {
  rec.validate();
  const Index width = window_samples(rec.sampling_rate_hz, window_s);
  log.validate(rec.n_timepoints(), width);

  const Index n_channels = rec.n_channels();
  const Index n_rows = static_cast<Index>(log.size()) * n_channels;
  ChannelSubtrialDataset ds;
  ds.n_channels = static_cast<int>(n_channels);
  ds.X.resize(n_rows, width);
  ds.y.reserve(static_cast<std::size_t>(n_rows));
  ds.group_id.reserve(static_cast<std::size_t>(n_rows));
  ds.channel_index.reserve(static_cast<std::size_t>(n_rows));
  Index row = 0;
  for (std::size_t s = 0; s < log.size(); ++s) {
    for (Index c = 0; c < n_channels; ++c, ++row) {
      ds.X.row(row) = rec.samples.row(c).segment(log.onsets[s], width);
      ds.y.push_back(log.labels[s]);
      ds.group_id.push_back(static_cast<int>(s));
      ds.channel_index.push_back(static_cast<int>(c));
    }
  }
  return ds;
}

namespace {

struct ClassGroups {
  std::vector<int> target;
  std::vector<int> nontarget;
};

ClassGroups split_groups_by_class(const ChannelSubtrialDataset& ds) {
  ClassGroups out;
  const auto groups = ds.groups();
  const auto labels = ds.group_labels();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    (labels[i] == kTarget ? out.target : out.nontarget).push_back(groups[i]);
  }
  return out;
}

}  // namespace

ChannelSubtrialDataset balance_classes(const ChannelSubtrialDataset& ds,
                                       std::uint64_t seed) {
  ds.validate();
  auto by_class = split_groups_by_class(ds);
  if (by_class.target.empty() || by_class.nontarget.empty()) {
    throw EmptyClassError("balancing needs at least one subtrial of each class");
  }
  const std::size_t keep = std::min(by_class.target.size(), by_class.nontarget.size());
  Rng rng(seed);
  std::vector<int> kept;
  for (auto* members : {&by_class.target, &by_class.nontarget}) {
    if (members->size() > keep) {
      rng.shuffle(std::span<int>(*members));
      members->resize(keep);
    }
    kept.insert(kept.end(), members->begin(), members->end());
  }
  return ds.subset_groups(kept);
}

SplitResult grouped_split(const ChannelSubtrialDataset& ds, double test_fraction,
                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw SplitError("test fraction must lie strictly between 0 and 1");
  }
  ds.validate();
  auto by_class = split_groups_by_class(ds);
  Rng rng(seed);
  std::vector<int> train_groups;
  std::vector<int> test_groups;
  for (auto* members : {&by_class.nontarget, &by_class.target}) {
    const auto n = members->size();
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(n)));
    if (n_test < 1 || n_test >= n) {
      throw SplitError("a class with " + std::to_string(n) +
                       " subtrials cannot give both partitions at least one subtrial");
    }
    rng.shuffle(std::span<int>(*members));
    test_groups.insert(test_groups.end(), members->begin(),
                       members->begin() + static_cast<std::ptrdiff_t>(n_test));
    train_groups.insert(train_groups.end(),
                        members->begin() + static_cast<std::ptrdiff_t>(n_test),
                        members->end());
  }
  return {ds.subset_groups(train_groups), ds.subset_groups(test_groups)};
}

std::vector<std::vector<int>> grouped_kfold(const ChannelSubtrialDataset& ds,
                                            int folds, std::uint64_t seed) {
  if (folds < 2) throw SplitError("need at least 2 folds");
  ds.validate();
  auto by_class = split_groups_by_class(ds);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  Rng rng(seed);
  for (auto* members : {&by_class.nontarget, &by_class.target}) {
    if (members->size() < static_cast<std::size_t>(folds)) {
      throw SplitError("a class has " + std::to_string(members->size()) +
                       " subtrials, fewer than the " + std::to_string(folds) +
                       " folds requested");
    }
    rng.shuffle(std::span<int>(*members));
    for (std::size_t i = 0; i < members->size(); ++i) {
      out[i % out.size()].push_back((*members)[i]);
    }
  }
  return out;
}

}  // namespace p300
