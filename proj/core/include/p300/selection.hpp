#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p300/classifier.hpp"
#include "p300/data_model.hpp"

namespace p300 {

// Where cross-validation gets its principal components from. PerFold refits
// PCA on each fold's training portion; Shared fits once on the whole
// selection input (the laxer protocol).
enum class PcaScope { PerFold, Shared };

enum class SelectionMethod { Forward, Restricted, Prefix };

std::string to_string(SelectionMethod method);

struct SelectionResult {
  SelectionMethod method = SelectionMethod::Forward;
  // Shortest prefix of greedy_order with the best validation accuracy.
  std::vector<int> chosen_indices;
  // Every component in the order it was added.
  std::vector<int> greedy_order;
  // Validation accuracy after each addition, aligned with greedy_order.
  std::vector<double> step_accuracies;
  int pool_size = 0;
  int folds = 0;
  ClassifierKind classifier = ClassifierKind::Lda;
  std::uint64_t seed = 0;

  double best_accuracy() const;
};

// Channel-level k-fold validation accuracy of a classifier on projections
// onto a fixed set of components. Folds are stratified at subtrial level and
// fixed at construction; PCA is fit per fold (or once, for Shared) on
// training rows only and projections onto the first pool_size components are
// cached.
class ComponentCrossValidator {
 public:
  ComponentCrossValidator(const ChannelSubtrialDataset& train, ClassifierSpec spec,
                          int pool_size, int folds, std::uint64_t seed,
                          PcaScope scope = PcaScope::PerFold);

  // Pooled fraction of correctly classified validation rows, or nullopt when
  // the classifier cannot be fit on some fold (e.g. singular covariance).
  std::optional<double> accuracy(const std::vector<int>& components) const;

  int pool_size() const { return pool_size_; }
  int folds() const { return static_cast<int>(folds_.size()); }
  const std::vector<std::vector<int>>& fold_groups() const { return fold_groups_; }

 private:
  struct Fold {
    Matrix train_projection;
    std::vector<int> train_labels;
    Matrix validation_projection;
    std::vector<int> validation_labels;
  };

  ClassifierSpec spec_;
  int pool_size_;
  std::uint64_t seed_;
  std::vector<std::vector<int>> fold_groups_;
  std::vector<Fold> folds_;
};

// Greedy forward selection over components 0..max_pool-1. Every step adds the
// candidate with the best validation accuracy (ties to the lower index) until
// the pool is exhausted; the result keeps the shortest best-scoring prefix.
SelectionResult forward_select(const ChannelSubtrialDataset& train,
                               const ClassifierSpec& spec, int max_pool = 50,
                               int folds = 3, std::uint64_t seed = 0,
                               PcaScope scope = PcaScope::PerFold);

// Forward selection with the pool limited to the top_n components.
SelectionResult restricted_forward_select(const ChannelSubtrialDataset& train,
                                          const ClassifierSpec& spec, int top_n = 5,
                                          int folds = 3, std::uint64_t seed = 0,
                                          PcaScope scope = PcaScope::PerFold);

// Scores the prefixes {0}, {0,1}, ..., {0..top_n-1} and keeps the shortest
// best one.
SelectionResult prefix_select(const ChannelSubtrialDataset& train,
                              const ClassifierSpec& spec, int top_n = 5, int folds = 3,
                              std::uint64_t seed = 0, PcaScope scope = PcaScope::PerFold);

}  // namespace p300
