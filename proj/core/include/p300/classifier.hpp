#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "p300/discriminant.hpp"
#include "p300/neuralnet.hpp"

namespace p300 {

enum class ClassifierKind { Lda, Qda, Lr, Nlr };

std::string to_string(ClassifierKind kind);
// Accepts "lda", "qda", "lr", "nlr" in any case. ConfigError otherwise.
ClassifierKind parse_classifier_kind(std::string_view name);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::Lda;
  // NLR only. Unset means one hidden unit per input feature.
  std::optional<int> hidden_units;
  ScgOptions scg;
  CovarianceOptions covariance;

  // Hidden units used for an input of the given width.
  Index resolve_hidden_units(Index n_features) const;
};

// A fitted LDA, QDA or network model behind one interface.
class Classifier {
 public:
  // seed only matters for the network kinds.
  static Classifier fit(const ClassifierSpec& spec, const Matrix& X,
                        std::span<const int> labels, std::uint64_t seed);

  ClassifierKind kind() const { return kind_; }
  const std::vector<int>& classes() const { return classes_; }

  // n x K class scores normalized to probabilities. For LDA/QDA this is the
  // softmax of the discriminants, i.e. the model's class posterior.
  Matrix class_scores(const Matrix& X) const;
  std::vector<int> predict(const Matrix& X) const;

  const std::variant<LdaModel, QdaModel, NnModel>& model() const { return model_; }

 private:
  Classifier(ClassifierKind kind, std::variant<LdaModel, QdaModel, NnModel> model,
             std::vector<int> classes)
      : kind_(kind), model_(std::move(model)), classes_(std::move(classes)) {}

  ClassifierKind kind_;
  std::variant<LdaModel, QdaModel, NnModel> model_;
  std::vector<int> classes_;
};

// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& scores);

}  // namespace p300
