#include "p300/pca.hpp"

#include <numeric>
#include <unordered_set>
#include <vector>

#include <Eigen/SVD>

#include "p300/errors.hpp"

namespace p300 {

PcaModel fit_pca(const Matrix& X_train) {
  if (X_train.rows() < 2) {
    throw InsufficientDataError("PCA needs at least two training rows");
  }
  if (!X_train.allFinite()) throw NumericalError("PCA input contains non-finite values");

  PcaModel model;
  model.n_train = X_train.rows();
  model.mean = X_train.colwise().mean().transpose();
  const Matrix centred = X_train.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Matrix> svd(centred, Eigen::ComputeThinV);
  const Index r = std::min(X_train.rows(), X_train.cols());
  model.components = svd.matrixV().leftCols(r);
  model.singular_values = svd.singularValues().head(r);

  for (Index j = 0; j < r; ++j) {
    Index arg = 0;
    model.components.col(j).cwiseAbs().maxCoeff(&arg);
    if (model.components(arg, j) < 0.0) model.components.col(j) *= -1.0;
  }
  return model;
}

Matrix project(const PcaModel& model, const Matrix& X, std::span<const int> indices) {
  if (X.cols() != model.dim()) {
    throw DimError("projection input has " + std::to_string(X.cols()) +
                   " columns, model expects " + std::to_string(model.dim()));
  }
  std::unordered_set<int> seen;
  Matrix basis(model.dim(), static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const int idx = indices[j];
    if (idx < 0 || idx >= model.n_components()) {
      throw IndexError("component index " + std::to_string(idx) + " out of range [0, " +
                       std::to_string(model.n_components()) + ")");
    }
    if (!seen.insert(idx).second) {
      throw IndexError("component index " + std::to_string(idx) + " repeated");
    }
    basis.col(static_cast<Index>(j)) = model.components.col(idx);
  }
  return (X.rowwise() - model.mean.transpose()) * basis;
}

Matrix project_leading(const PcaModel& model, const Matrix& X, Index k) {
  std::vector<int> indices(static_cast<std::size_t>(k));
  std::iota(indices.begin(), indices.end(), 0);
  return project(model, X, indices);
}

Vector explained_variance(const PcaModel& model) {
  return model.singular_values.array().square() / static_cast<double>(model.n_train);
}

}  // namespace p300
