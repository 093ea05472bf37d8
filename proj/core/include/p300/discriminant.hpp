#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "p300/data_model.hpp"

namespace p300 {

// Reciprocal condition number below which a covariance is treated as singular.
inline constexpr double kSingularRcond = 1e-12;

struct CovarianceOptions {
  // Divide by N_k - 1 instead of N_k.
  bool unbiased = false;
  // Added to the diagonal before factorization. Zero reproduces the plain
  // estimator, including its singular-covariance failures.
  double ridge = 0.0;
};

struct GaussianClassParams {
  int label = 0;
  Index count = 0;
  double prior = 0.0;
  Vector mean;
  Matrix covariance;
};

// Class statistics in ascending label order. Requires at least two classes
// (EmptyClassError) and two samples per class (InsufficientDataError).
std::vector<GaussianClassParams> estimate_class_params(const Matrix& X,
                                                       std::span<const int> labels,
                                                       const CovarianceOptions& options);

// Linear discriminant analysis with the pooled covariance
// sum_k (N_k / N) Sigma_k shared by every class.
struct LdaModel {
  std::vector<GaussianClassParams> classes;
  Matrix pooled_covariance;
  double ridge = 0.0;
  Eigen::LLT<Matrix> factor;
  // Column k holds Sigma^-1 mu_k.
  Matrix whitened_means;
  // -1/2 mu_k' Sigma^-1 mu_k + ln pi_k.
  Vector offsets;

  Index dim() const { return pooled_covariance.rows(); }
  std::vector<int> labels() const;
};

struct QdaModel {
  std::vector<GaussianClassParams> classes;
  double ridge = 0.0;
  std::vector<Eigen::LLT<Matrix>> factors;
  // ln |Sigma_k| from the Cholesky diagonal.
  std::vector<double> log_dets;

  Index dim() const { return classes.empty() ? 0 : classes.front().mean.size(); }
  std::vector<int> labels() const;
};

LdaModel fit_lda(const Matrix& X, std::span<const int> labels,
                 const CovarianceOptions& options = {});
QdaModel fit_qda(const Matrix& X, std::span<const int> labels,
                 const CovarianceOptions& options = {});

// Rebuild the cached factorizations from stored parameters (deserialization,
// or a QDA whose class covariances are set by hand).
LdaModel make_lda(std::vector<GaussianClassParams> classes, Matrix pooled_covariance,
                  double ridge = 0.0);
QdaModel make_qda(std::vector<GaussianClassParams> classes, double ridge = 0.0);

// delta_k(x) = x' Sigma^-1 mu_k - 1/2 mu_k' Sigma^-1 mu_k + ln pi_k
Vector lda_discriminants(const LdaModel& model, const Vector& x);
// delta_k(x) = -1/2 ln|Sigma_k| - 1/2 (x - mu_k)' Sigma_k^-1 (x - mu_k) + ln pi_k
Vector qda_discriminants(const QdaModel& model, const Vector& x);

// Row-wise discriminants, n x K.
Matrix discriminants(const LdaModel& model, const Matrix& X);
Matrix discriminants(const QdaModel& model, const Matrix& X);

// Argmax of the discriminants, ties to the lower class index. Returns labels.
std::vector<int> predict(const LdaModel& model, const Matrix& X);
std::vector<int> predict(const QdaModel& model, const Matrix& X);

// Row-wise argmax with ties to the lowest column.
std::vector<Index> argmax_rows(const Matrix& scores);

}  // namespace p300
