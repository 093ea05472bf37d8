#include "p300/selection.hpp"

#include <algorithm>
#include <numeric>

#include "p300/errors.hpp"
#include "p300/pca.hpp"
#include "p300/rng.hpp"

namespace p300 {

std::string to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::Forward: return "forward";
    case SelectionMethod::Restricted: return "restricted";
    case SelectionMethod::Prefix: return "prefix";
  }
  return "?";
}

double SelectionResult::best_accuracy() const {
  if (step_accuracies.empty()) return 0.0;
  return *std::max_element(step_accuracies.begin(), step_accuracies.end());
}

namespace {

Matrix select_columns(const Matrix& m, const std::vector<int>& columns) {
  Matrix out(m.rows(), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.col(static_cast<Index>(j)) = m.col(columns[j]);
  }
  return out;
}

}  // namespace

ComponentCrossValidator::ComponentCrossValidator(const ChannelSubtrialDataset& train,
                                                 ClassifierSpec spec, int pool_size,
                                                 int folds, std::uint64_t seed,
                                                 PcaScope scope)
    : spec_(std::move(spec)), pool_size_(pool_size), seed_(seed) {
  if (pool_size < 1) throw ConfigError("selection pool must hold at least one component");
  fold_groups_ = grouped_kfold(train, folds, derive_seed(seed, "cv-folds"));

  std::optional<PcaModel> shared;
  if (scope == PcaScope::Shared) shared = fit_pca(train.X);

  const auto all_groups = train.groups();
  for (const auto& validation_groups : fold_groups_) {
    std::vector<int> training_groups;
    for (const int g : all_groups) {
      if (std::find(validation_groups.begin(), validation_groups.end(), g) ==
          validation_groups.end()) {
        training_groups.push_back(g);
      }
    }
    const auto fold_train = train.subset_groups(training_groups);
    const auto fold_validation = train.subset_groups(validation_groups);
    const PcaModel pca = shared ? *shared : fit_pca(fold_train.X);
    if (pool_size > pca.n_components()) {
      throw InsufficientDataError("selection pool of " + std::to_string(pool_size) +
                                  " exceeds the " + std::to_string(pca.n_components()) +
                                  " components available in a fold");
    }
    folds_.push_back({project_leading(pca, fold_train.X, pool_size), fold_train.y,
                      project_leading(pca, fold_validation.X, pool_size),
                      fold_validation.y});
  }
}

std::optional<double> ComponentCrossValidator::accuracy(
    const std::vector<int>& components) const {
  for (const int c : components) {
    if (c < 0 || c >= pool_size_) throw IndexError("component outside selection pool");
  }
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t f = 0; f < folds_.size(); ++f) {
    const auto& fold = folds_[f];
    try {
      const auto model =
          Classifier::fit(spec_, select_columns(fold.train_projection, components),
                          fold.train_labels, derive_seed(seed_, "cv-classifier", f));
      const auto predicted = model.predict(select_columns(fold.validation_projection, components));
      for (std::size_t i = 0; i < predicted.size(); ++i) {
        correct += predicted[i] == fold.validation_labels[i];
      }
      total += predicted.size();
    } catch (const SingularCovarianceError&) {
      return std::nullopt;
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

SelectionResult greedy_select(const ComponentCrossValidator& cv, SelectionMethod method,
                              const ClassifierSpec& spec, std::uint64_t seed) {
  SelectionResult result;
  result.method = method;
  result.pool_size = cv.pool_size();
  result.folds = cv.folds();
  result.classifier = spec.kind;
  result.seed = seed;

  std::vector<int> remaining(static_cast<std::size_t>(cv.pool_size()));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> chosen;
  while (!remaining.empty()) {
    std::optional<double> best;
    std::size_t best_at = 0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      auto trial = chosen;
      trial.push_back(remaining[i]);
      const auto acc = cv.accuracy(trial);
      if (acc && (!best || *acc > *best)) {
        best = acc;
        best_at = i;
      }
    }
    if (!best) break;
    chosen.push_back(remaining[best_at]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_at));
    result.step_accuracies.push_back(*best);
  }
  if (chosen.empty()) {
    throw SingularCovarianceError("no candidate component could be fit during selection");
  }
  result.greedy_order = chosen;
  const auto best_step = std::max_element(result.step_accuracies.begin(),
                                          result.step_accuracies.end()) -
                         result.step_accuracies.begin();
  result.chosen_indices.assign(chosen.begin(), chosen.begin() + best_step + 1);
  return result;
}

}  // namespace

SelectionResult forward_select(const ChannelSubtrialDataset& train,
                               const ClassifierSpec& spec, int max_pool, int folds,
                               std::uint64_t seed, PcaScope scope) {
  const ComponentCrossValidator cv(train, spec, max_pool, folds, seed, scope);
  return greedy_select(cv, SelectionMethod::Forward, spec, seed);
}

SelectionResult restricted_forward_select(const ChannelSubtrialDataset& train,
                                          const ClassifierSpec& spec, int top_n, int folds,
                                          std::uint64_t seed, PcaScope scope) {
  const ComponentCrossValidator cv(train, spec, top_n, folds, seed, scope);
  return greedy_select(cv, SelectionMethod::Restricted, spec, seed);
}

SelectionResult prefix_select(const ChannelSubtrialDataset& train,
                              const ClassifierSpec& spec, int top_n, int folds,
                              std::uint64_t seed, PcaScope scope) {
  const ComponentCrossValidator cv(train, spec, top_n, folds, seed, scope);
  SelectionResult result;
  result.method = SelectionMethod::Prefix;
  result.pool_size = top_n;
  result.folds = cv.folds();
  result.classifier = spec.kind;
  result.seed = seed;
  std::vector<int> prefix;
  for (int k = 0; k < top_n; ++k) {
    prefix.push_back(k);
    const auto acc = cv.accuracy(prefix);
    if (!acc) break;
    result.greedy_order.push_back(k);
    result.step_accuracies.push_back(*acc);
  }
  if (result.greedy_order.empty()) {
    throw SingularCovarianceError("no prefix of components could be fit during selection");
  }
  const auto best_step = std::max_element(result.step_accuracies.begin(),
                                          result.step_accuracies.end()) -
                         result.step_accuracies.begin();
  result.chosen_indices.assign(result.greedy_order.begin(),
                               result.greedy_order.begin() + best_step + 1);
  return result;
}

}  // namespace p300
