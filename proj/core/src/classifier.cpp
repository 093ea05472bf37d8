#include "p300/classifier.hpp"

#include <algorithm>
#include <cctype>

#include "p300/errors.hpp"

namespace p300 {

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Lda: return "LDA";
    case ClassifierKind::Qda: return "QDA";
    case ClassifierKind::Lr: return "LR";
    case ClassifierKind::Nlr: return "NLR";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lda") return ClassifierKind::Lda;
  if (lower == "qda") return ClassifierKind::Qda;
  if (lower == "lr") return ClassifierKind::Lr;
  if (lower == "nlr") return ClassifierKind::Nlr;
  throw ConfigError("unknown classifier '" + std::string(name) + "'");
}

Index ClassifierSpec::resolve_hidden_units(Index n_features) const {
  switch (kind) {
    case ClassifierKind::Lr: return 0;
    case ClassifierKind::Nlr:
      if (hidden_units) {
        if (*hidden_units < 1) throw ConfigError("NLR needs at least one hidden unit");
        return *hidden_units;
      }
      return std::max<Index>(n_features, 1);
    default: return 0;
  }
}

Classifier Classifier::fit(const ClassifierSpec& spec, const Matrix& X,
                           std::span<const int> labels, std::uint64_t seed) {
  switch (spec.kind) {
    case ClassifierKind::Lda: {
      auto m = fit_lda(X, labels, spec.covariance);
      auto classes = m.labels();
      return {spec.kind, std::move(m), std::move(classes)};
    }
    case ClassifierKind::Qda: {
      auto m = fit_qda(X, labels, spec.covariance);
      auto classes = m.labels();
      return {spec.kind, std::move(m), std::move(classes)};
    }
    case ClassifierKind::Lr:
    case ClassifierKind::Nlr: {
      auto m = train_nn(X, labels, spec.resolve_hidden_units(X.cols()), spec.scg, seed);
      auto classes = m.classes;
      return {spec.kind, std::move(m), std::move(classes)};
    }
  }
  throw ConfigError("unhandled classifier kind");
}

Matrix Classifier::class_scores(const Matrix& X) const {
  return std::visit(
      [&X](const auto& m) -> Matrix {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, NnModel>) {
          return m.probabilities(X);
        } else {
          return softmax_rows(discriminants(m, X));
        }
      },
      model_);
}

std::vector<int> Classifier::predict(const Matrix& X) const {
  const auto winners = argmax_rows(class_scores(X));
  std::vector<int> out;
  out.reserve(winners.size());
  for (const Index k : winners) out.push_back(classes_[static_cast<std::size_t>(k)]);
  return out;
}

Matrix softmax_rows(const Matrix& scores) {
  const Vector row_max = scores.rowwise().maxCoeff();
  Matrix e = (scores.colwise() - row_max).array().exp().matrix();
  const Vector sums = e.rowwise().sum();
  return e.array().colwise() / sums.array();
}

}  // namespace p300
