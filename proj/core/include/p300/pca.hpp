#pragma once

#include <span>

#include "p300/data_model.hpp"

namespace p300 {

// Principal components of a training matrix.
//
// components is d x r, its columns are the right singular vectors of the
// mean-centred training matrix, ordered by decreasing singular value, with
// r = min(n_train, d). Each column's largest-magnitude entry is positive so
// that component indices are reproducible.
struct PcaModel {
  Vector mean;
  Matrix components;
  Vector singular_values;
  Index n_train = 0;

  Index dim() const { return components.rows(); }
  Index n_components() const { return components.cols(); }
};

// InsufficientDataError if X_train has fewer than two rows.
PcaModel fit_pca(const Matrix& X_train);

// Column j of the result is (X - mean) . v_{indices[j]}. IndexError for an
// index outside [0, r) or a repeated index; DimError on a width mismatch.
Matrix project(const PcaModel& model, const Matrix& X, std::span<const int> indices);

// Projection onto the first k components.
Matrix project_leading(const PcaModel& model, const Matrix& X, Index k);

// sigma_i^2 / n_train, i.e. the variance of the training data along each
// component.
Vector explained_variance(const PcaModel& model);

}  // namespace p300
