#include "p300/discriminant.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "p300/errors.hpp"

namespace p300 {

namespace {

Eigen::LLT<Matrix> factorize(const Matrix& covariance, double ridge,
                             const std::string& what) {
  Matrix regularized = covariance;
  if (ridge > 0.0) regularized.diagonal().array() += ridge;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(regularized, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(largest > 0.0) || smallest / largest < kSingularRcond) {
    throw SingularCovarianceError(what + " is singular (reciprocal condition " +
                                  std::to_string(largest > 0.0 ? smallest / largest : 0.0) +
                                  ")");
  }
  Eigen::LLT<Matrix> llt(regularized);
  if (llt.info() != Eigen::Success) {
    throw SingularCovarianceError(what + " is not positive definite");
  }
  return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void check_dim(Index expected, Index got) {
  if (expected != got) {
    throw DimError("input has dimension " + std::to_string(got) + ", model expects " +
                   std::to_string(expected));
  }
}

std::vector<int> labels_of(const std::vector<GaussianClassParams>& classes) {
  std::vector<int> out;
  out.reserve(classes.size());
  for (const auto& c : classes) out.push_back(c.label);
  return out;
}

template <typename Model>
std::vector<int> predict_labels(const Model& model, const Matrix& X) {
  const auto winners = argmax_rows(discriminants(model, X));
  std::vector<int> out;
  out.reserve(winners.size());
  for (const Index k : winners) out.push_back(model.classes[static_cast<std::size_t>(k)].label);
  return out;
}

}  // namespace

std::vector<GaussianClassParams> estimate_class_params(const Matrix& X,
                                                       std::span<const int> labels,
                                                       const CovarianceOptions& options) {
  if (static_cast<Index>(labels.size()) != X.rows()) {
    throw DimError("label count does not match row count");
  }
  std::map<int, std::vector<Index>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[labels[i]].push_back(static_cast<Index>(i));
  }
  if (members.size() < 2) throw EmptyClassError("need samples from at least two classes");

  const double n_total = static_cast<double>(X.rows());
  std::vector<GaussianClassParams> out;
  for (const auto& [label, rows] : members) {
    const auto n_k = static_cast<Index>(rows.size());
    if (n_k < 2) {
      throw InsufficientDataError("class " + std::to_string(label) +
                                  " has fewer than two samples");
    }
    Matrix block(n_k, X.cols());
    for (Index i = 0; i < n_k; ++i) block.row(i) = X.row(rows[static_cast<std::size_t>(i)]);

    GaussianClassParams params;
    params.label = label;
    params.count = n_k;
    params.prior = static_cast<double>(n_k) / n_total;
    params.mean = block.colwise().mean().transpose();
    const Matrix centred = block.rowwise() - params.mean.transpose();
    const double denom = static_cast<double>(options.unbiased ? n_k - 1 : n_k);
    params.covariance = (centred.transpose() * centred) / denom;
    out.push_back(std::move(params));
  }
  return out;
}

std::vector<int> LdaModel::labels() const { return labels_of(classes); }
std::vector<int> QdaModel::labels() const { return labels_of(classes); }

LdaModel make_lda(std::vector<GaussianClassParams> classes, Matrix pooled_covariance,
                  double ridge) {
  LdaModel model;
  model.factor = factorize(pooled_covariance, ridge, "pooled covariance");
  model.classes = std::move(classes);
  model.pooled_covariance = std::move(pooled_covariance);
  model.ridge = ridge;

  const Index d = model.pooled_covariance.rows();
  const auto K = static_cast<Index>(model.classes.size());
  model.whitened_means.resize(d, K);
  model.offsets.resize(K);
  for (Index k = 0; k < K; ++k) {
    const auto& c = model.classes[static_cast<std::size_t>(k)];
    check_dim(d, c.mean.size());
    model.whitened_means.col(k) = model.factor.solve(c.mean);
    model.offsets(k) = -0.5 * c.mean.dot(model.whitened_means.col(k)) + std::log(c.prior);
  }
  return model;
}

LdaModel fit_lda(const Matrix& X, std::span<const int> labels,
                 const CovarianceOptions& options) {
  auto classes = estimate_class_params(X, labels, options);
  Matrix pooled = Matrix::Zero(X.cols(), X.cols());
  for (const auto& c : classes) pooled += c.prior * c.covariance;
  return make_lda(std::move(classes), std::move(pooled), options.ridge);
}

QdaModel make_qda(std::vector<GaussianClassParams> classes, double ridge) {
  QdaModel model;
  model.ridge = ridge;
  for (const auto& c : classes) {
    auto llt = factorize(c.covariance, ridge,
                         "covariance of class " + std::to_string(c.label));
    model.log_dets.push_back(log_det(llt));
    model.factors.push_back(std::move(llt));
  }
  model.classes = std::move(classes);
  return model;
}

QdaModel fit_qda(const Matrix& X, std::span<const int> labels,
                 const CovarianceOptions& options) {
  auto classes = estimate_class_params(X, labels, options);
  if (options.ridge == 0.0) {
    for (const auto& c : classes) {
      if (c.count <= X.cols()) {
        throw SingularCovarianceError(
            "class " + std::to_string(c.label) + " has " + std::to_string(c.count) +
            " samples for " + std::to_string(X.cols()) +
            " features; its covariance is singular");
      }
    }
  }
  return make_qda(std::move(classes), options.ridge);
}

Matrix discriminants(const LdaModel& model, const Matrix& X) {
  check_dim(model.dim(), X.cols());
  return (X * model.whitened_means).rowwise() + model.offsets.transpose();
}

Matrix discriminants(const QdaModel& model, const Matrix& X) {
  check_dim(model.dim(), X.cols());
  const auto K = static_cast<Index>(model.classes.size());
  Matrix out(X.rows(), K);
  for (Index k = 0; k < K; ++k) {
    const auto& c = model.classes[static_cast<std::size_t>(k)];
    const Matrix diff = (X.rowwise() - c.mean.transpose()).transpose();
    const Matrix whitened = model.factors[static_cast<std::size_t>(k)].matrixL().solve(diff);
    const Vector mahalanobis = whitened.colwise().squaredNorm().transpose();
    out.col(k) = (-0.5 * mahalanobis).array() +
                 (-0.5 * model.log_dets[static_cast<std::size_t>(k)] + std::log(c.prior));
  }
  return out;
}

Vector lda_discriminants(const LdaModel& model, const Vector& x) {
  return discriminants(model, Matrix(x.transpose())).row(0).transpose();
}

Vector qda_discriminants(const QdaModel& model, const Vector& x) {
  return discriminants(model, Matrix(x.transpose())).row(0).transpose();
}

std::vector<int> predict(const LdaModel& model, const Matrix& X) {
  return predict_labels(model, X);
}

std::vector<int> predict(const QdaModel& model, const Matrix& X) {
  return predict_labels(model, X);
}

std::vector<Index> argmax_rows(const Matrix& scores) {
  std::vector<Index> out(static_cast<std::size_t>(scores.rows()), 0);
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index k = 1; k < scores.cols(); ++k) {
      if (scores(i, k) > scores(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace p300
