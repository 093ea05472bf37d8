#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p300/data_model.hpp"
#include "p300/scg.hpp"

namespace p300 {

// Weights of a softmax network with one sigmoid hidden layer of M units.
// With M = 0 there is no hidden layer and the outputs are affine in the
// inputs (multinomial logistic regression); output_weights is then d x K.
//
// Flat parameter order: hidden_bias (M), hidden_weights (d x M, column-major),
// output_bias (K), output_weights (M x K or d x K, column-major).
struct NetworkWeights {
  Index n_inputs = 0;
  Index n_hidden = 0;
  Index n_outputs = 0;
  Vector hidden_bias;
  Matrix hidden_weights;
  Vector output_bias;
  Matrix output_weights;

  // M(d + 1) + K(M + 1), or K(d + 1) when M = 0.
  static Index parameter_count(Index d, Index M, Index K);
  Index parameter_count() const { return parameter_count(n_inputs, n_hidden, n_outputs); }

  Vector flatten() const;
  static NetworkWeights unflatten(Index d, Index M, Index K, const Vector& theta);
  static NetworkWeights zeros(Index d, Index M, Index K);
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, biases zero.
NetworkWeights init_network(Index d, Index M, Index K, std::uint64_t seed);

// Class probabilities, one row per input row. DimError on a width mismatch.
Matrix forward(const NetworkWeights& weights, const Matrix& X);
Vector forward(const NetworkWeights& weights, const Vector& x);

// Rows of T must be one-hot (TargetError).
LossAndGradient nll_loss_and_gradient(const NetworkWeights& weights, const Matrix& X,
                                      const Matrix& T);

// n x K indicator matrix with column k for classes[k].
Matrix one_hot(std::span<const int> labels, std::span<const int> classes);

struct NnModel {
  NetworkWeights weights;
  std::vector<int> classes;
  ScgDiagnostics diagnostics;

  Index n_hidden() const { return weights.n_hidden; }
  Matrix probabilities(const Matrix& X) const { return forward(weights, X); }
  std::vector<int> predict(const Matrix& X) const;
};

// Trains by minimizing the negative log-likelihood with SCG from
// init_network(d, M, K, seed). M = 0 gives the linear model.
NnModel train_nn(const Matrix& X, std::span<const int> labels, Index n_hidden,
                 const ScgOptions& options, std::uint64_t seed);

}  // namespace p300
