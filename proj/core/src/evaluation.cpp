#include "p300/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <unordered_map>

#include "p300/errors.hpp"
#include "p300/pca.hpp"
#include "p300/rng.hpp"

namespace p300 {

std::string to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::Raw: return "raw";
    case FeatureMode::PcaExplicit: return "pca";
    case FeatureMode::PcaForwardSelect: return "fs";
    case FeatureMode::PcaRestrictedSelect: return "restricted";
  }
  return "?";
}

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "raw") return FeatureMode::Raw;
  if (name == "pca") return FeatureMode::PcaExplicit;
  if (name == "fs") return FeatureMode::PcaForwardSelect;
  if (name == "restricted") return FeatureMode::PcaRestrictedSelect;
  throw ConfigError("unknown feature mode '" + std::string(name) +
                    "' (expected raw, pca, fs or restricted)");
}

std::string to_string(NormalizeScope scope) {
  switch (scope) {
    case NormalizeScope::PerRow: return "row";
    case NormalizeScope::ContinuousChannel: return "channel";
    case NormalizeScope::None: return "none";
  }
  return "?";
}

NormalizeScope parse_normalize_scope(std::string_view name) {
  if (name == "row") return NormalizeScope::PerRow;
  if (name == "channel") return NormalizeScope::ContinuousChannel;
  if (name == "none") return NormalizeScope::None;
  throw ConfigError("unknown normalization scope '" + std::string(name) +
                    "' (expected row, channel or none)");
}

void PipelineConfig::validate() const {
  if (n_repetitions < 1) throw ConfigError("need at least one repetition");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie strictly between 0 and 1");
  }
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (features.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  switch (features.mode) {
    case FeatureMode::PcaExplicit:
      if (features.components.empty()) {
        throw ConfigError("explicit PCA features need a component list");
      }
      break;
    case FeatureMode::PcaForwardSelect:
      if (features.max_pool < 1) throw ConfigError("max_pool must be >= 1");
      break;
    case FeatureMode::PcaRestrictedSelect:
      if (features.top_n < 1) throw ConfigError("top_n must be >= 1");
      break;
    case FeatureMode::Raw: break;
  }
  if (classifier.hidden_units && *classifier.hidden_units < 1) {
    throw ConfigError("hidden_units must be >= 1");
  }
  classifier.scg.validate();
}

VoteResult vote_aggregate(const Matrix& channel_scores, std::span<const int> group_ids,
                          int channel_count) {
  if (static_cast<Index>(group_ids.size()) != channel_scores.rows()) {
    throw GroupError("group id count does not match score rows");
  }
  std::vector<int> order;
  std::unordered_map<int, std::vector<Index>> members;
  for (std::size_t i = 0; i < group_ids.size(); ++i) {
    auto& rows = members[group_ids[i]];
    if (rows.empty()) order.push_back(group_ids[i]);
    rows.push_back(static_cast<Index>(i));
  }

  const auto row_winners = argmax_rows(channel_scores);
  const Index K = channel_scores.cols();
  VoteResult out;
  for (const int g : order) {
    const auto& rows = members[g];
    if (static_cast<int>(rows.size()) != channel_count) {
      throw GroupError("group " + std::to_string(g) + " has " + std::to_string(rows.size()) +
                       " rows, expected " + std::to_string(channel_count));
    }
    std::vector<int> votes(static_cast<std::size_t>(K), 0);
    Vector summed = Vector::Zero(K);
    for (const Index r : rows) {
      ++votes[static_cast<std::size_t>(row_winners[static_cast<std::size_t>(r)])];
      summed += channel_scores.row(r).transpose();
    }
    int best = 0;
    for (int k = 1; k < K; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const auto bu = static_cast<std::size_t>(best);
      if (votes[ku] > votes[bu] || (votes[ku] == votes[bu] && summed(k) > summed(best))) {
        best = k;
      }
    }
    out.group_ids.push_back(g);
    out.winners.push_back(best);
  }
  return out;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size() || predictions.empty()) {
    throw DimError("accuracy needs two non-empty sequences of equal length");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

ChannelSubtrialDataset prepare_dataset(const Recording& rec, const StimulusLog& log,
                                       const PreprocessConfig& config) {
  rec.validate();
  Recording signal = rec;
  if (config.filter) {
    const auto coeffs = design_bandpass(config.bp_low_hz, config.bp_high_hz,
                                        config.bp_order, rec.sampling_rate_hz);
    signal = apply_filter(coeffs, signal, config.zero_phase);
  }
  if (config.normalize == NormalizeScope::ContinuousChannel) {
    signal = zscore_channels(signal);
  }
  auto ds = slice_channel_subtrials(signal, log, config.window_s);
  if (config.normalize == NormalizeScope::PerRow) ds = zscore_normalize(ds).dataset;
  return ds;
}

namespace {

struct FeatureSet {
  Matrix train;
  Matrix test;
  std::vector<int> components;
  std::optional<SelectionResult> selection;
};

FeatureSet build_features(const SplitResult& split, const PipelineConfig& config, int rep,
                          const FitObserver& observer) {
  FeatureSet out;
  const auto& features = config.features;
  if (features.mode == FeatureMode::Raw) {
    out.train = split.train.X;
    out.test = split.test.X;
    return out;
  }

  const auto train_groups = split.train.groups();
  if (features.mode == FeatureMode::PcaExplicit) {
    out.components = features.components;
  } else {
    if (observer) observer(rep, "selection", train_groups);
    const auto seed = derive_seed(config.seed, "selection", static_cast<std::uint64_t>(rep));
    const auto& spec = config.classifier;
    if (features.mode == FeatureMode::PcaForwardSelect) {
      out.selection = forward_select(split.train, spec, features.max_pool, features.folds,
                                     seed, features.pca_scope);
    } else if (features.prefix_mode) {
      out.selection =
          prefix_select(split.train, spec, features.top_n, features.folds, seed,
                        features.pca_scope);
    } else {
      out.selection = restricted_forward_select(split.train, spec, features.top_n,
                                                features.folds, seed, features.pca_scope);
    }
    out.components = out.selection->chosen_indices;
  }

  if (observer) observer(rep, "pca", train_groups);
  const auto pca = fit_pca(split.train.X);
  out.train = project(pca, split.train.X, out.components);
  out.test = project(pca, split.test.X, out.components);
  return out;
}

RepetitionResult run_repetition(const ChannelSubtrialDataset& data,
                                const PipelineConfig& config, int rep,
                                const FitObserver& observer) {
  RepetitionResult result;
  result.index = rep;
  const auto urep = static_cast<std::uint64_t>(rep);
  const auto split =
      grouped_split(data, config.test_fraction, derive_seed(config.seed, "split", urep));
  const auto test_groups = split.test.groups();
  result.n_train_subtrials = static_cast<int>(split.train.n_groups());
  result.n_test_subtrials = static_cast<int>(test_groups.size());
  if (observer) observer(rep, "test", test_groups);

  try {
    auto features = build_features(split, config, rep, observer);
    result.chosen_components = features.components;
    result.selection = std::move(features.selection);

    if (observer) observer(rep, "classifier", split.train.groups());
    const auto model = Classifier::fit(config.classifier, features.train, split.train.y,
                                       derive_seed(config.seed, "classifier", urep));
    const Matrix scores = model.class_scores(features.test);

    std::vector<int> row_predictions;
    for (const Index k : argmax_rows(scores)) {
      row_predictions.push_back(model.classes()[static_cast<std::size_t>(k)]);
    }
    result.channel_accuracy = accuracy(row_predictions, split.test.y);

    const auto vote = vote_aggregate(scores, split.test.group_id, split.test.n_channels);
    std::vector<int> subtrial_predictions;
    for (const int w : vote.winners) {
      subtrial_predictions.push_back(model.classes()[static_cast<std::size_t>(w)]);
    }
    result.accuracy = accuracy(subtrial_predictions, split.test.group_labels());
  } catch (const SingularCovarianceError& e) {
    result.error_kind = e.kind();
    result.error_message = e.what();
  } catch (const NumericalError& e) {
    result.error_kind = e.kind();
    result.error_message = e.what();
  }
  return result;
}

std::optional<double> mean_of(const std::vector<RepetitionResult>& reps,
                              std::optional<double> RepetitionResult::*field) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : reps) {
    if (r.*field) {
      sum += *(r.*field);
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

}  // namespace

EvalReport run_experiment(const ChannelSubtrialDataset& ds, const PipelineConfig& config,
                          const FitObserver& observer) {
  config.validate();
  ds.validate();

  std::optional<ChannelSubtrialDataset> balanced_once;
  if (config.balance && !config.rebalance_per_repetition) {
    balanced_once = balance_classes(ds, derive_seed(config.seed, "balance", 0));
  }

  const auto n = static_cast<std::size_t>(config.n_repetitions);
  std::vector<RepetitionResult> results(n);
  std::vector<std::exception_ptr> failures(n);

  auto run_one = [&](std::size_t rep) {
    try {
      if (config.balance && config.rebalance_per_repetition) {
        const auto data = balance_classes(ds, derive_seed(config.seed, "balance", rep));
        if (observer) observer(static_cast<int>(rep), "balance", data.groups());
        results[rep] = run_repetition(data, config, static_cast<int>(rep), observer);
      } else {
        if (observer && balanced_once) {
          observer(static_cast<int>(rep), "balance", balanced_once->groups());
        }
        results[rep] = run_repetition(balanced_once ? *balanced_once : ds, config,
                                      static_cast<int>(rep), observer);
      }
    } catch (...) {
      failures[rep] = std::current_exception();
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), n);
  if (workers <= 1) {
    for (std::size_t rep = 0; rep < n; ++rep) run_one(rep);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t rep = next++; rep < n; rep = next++) run_one(rep);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  EvalReport report;
  report.config = config;
  report.repetitions = std::move(results);
  report.mean_accuracy = mean_of(report.repetitions, &RepetitionResult::accuracy);
  report.mean_channel_accuracy =
      mean_of(report.repetitions, &RepetitionResult::channel_accuracy);
  for (const auto& r : report.repetitions) {
    if (r.error_kind) ++report.error_tallies[*r.error_kind];
  }
  return report;
}

}  // namespace p300
