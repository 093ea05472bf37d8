#include "p300/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "p300/discriminant.hpp"
#include "p300/errors.hpp"
#include "p300/rng.hpp"

namespace p300 {

Index NetworkWeights::parameter_count(Index d, Index M, Index K) {
  return M == 0 ? K * (d + 1) : M * (d + 1) + K * (M + 1);
}

NetworkWeights NetworkWeights::zeros(Index d, Index M, Index K) {
  NetworkWeights w;
  w.n_inputs = d;
  w.n_hidden = M;
  w.n_outputs = K;
  w.hidden_bias = Vector::Zero(M);
  w.hidden_weights = Matrix::Zero(d, M);
  w.output_bias = Vector::Zero(K);
  w.output_weights = Matrix::Zero(M == 0 ? d : M, K);
  return w;
}

Vector NetworkWeights::flatten() const {
  Vector theta(parameter_count());
  Index at = 0;
  auto put = [&](const auto& block) {
    theta.segment(at, block.size()) = block.reshaped();
    at += block.size();
  };
  put(hidden_bias);
  put(hidden_weights);
  put(output_bias);
  put(output_weights);
  return theta;
}

NetworkWeights NetworkWeights::unflatten(Index d, Index M, Index K, const Vector& theta) {
  if (theta.size() != parameter_count(d, M, K)) {
    throw DimError("parameter vector has length " + std::to_string(theta.size()) +
                   ", expected " + std::to_string(parameter_count(d, M, K)));
  }
  auto w = zeros(d, M, K);
  Index at = 0;
  auto take = [&](auto& block) {
    block.reshaped() = theta.segment(at, block.size());
    at += block.size();
  };
  take(w.hidden_bias);
  take(w.hidden_weights);
  take(w.output_bias);
  take(w.output_weights);
  return w;
}

NetworkWeights init_network(Index d, Index M, Index K, std::uint64_t seed) {
  if (d < 1 || K < 1 || M < 0) throw ConfigError("network needs d >= 1, K >= 1, M >= 0");
  auto w = NetworkWeights::zeros(d, M, K);
  Rng rng(seed);
  auto fill = [&rng](Matrix& m, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
    }
  };
  fill(w.hidden_weights, d);
  fill(w.output_weights, M == 0 ? d : M);
  return w;
}

namespace {

struct ForwardPass {
  Matrix hidden;   // Z, n x M (unused when M = 0)
  Matrix logits;   // Y, n x K
  Vector log_norm; // log-sum-exp of each logit row
};

ForwardPass run_forward(const NetworkWeights& w, const Matrix& X) {
  if (X.cols() != w.n_inputs) {
    throw DimError("input has " + std::to_string(X.cols()) + " features, network expects " +
                   std::to_string(w.n_inputs));
  }
  ForwardPass pass;
  if (w.n_hidden > 0) {
    const Matrix activation = (X * w.hidden_weights).rowwise() + w.hidden_bias.transpose();
    pass.hidden = (1.0 + (-activation.array()).exp()).inverse().matrix();
    pass.logits = (pass.hidden * w.output_weights).rowwise() + w.output_bias.transpose();
  } else {
    pass.logits = (X * w.output_weights).rowwise() + w.output_bias.transpose();
  }
  const Vector row_max = pass.logits.rowwise().maxCoeff();
  pass.log_norm =
      row_max.array() +
      (pass.logits.colwise() - row_max).array().exp().rowwise().sum().log();
  return pass;
}

}  // namespace

Matrix forward(const NetworkWeights& weights, const Matrix& X) {
  const auto pass = run_forward(weights, X);
  return (pass.logits.colwise() - pass.log_norm).array().exp().matrix();
}

Vector forward(const NetworkWeights& weights, const Vector& x) {
  return forward(weights, Matrix(x.transpose())).row(0).transpose();
}

LossAndGradient nll_loss_and_gradient(const NetworkWeights& w, const Matrix& X,
                                      const Matrix& T) {
  if (T.rows() != X.rows() || T.cols() != w.n_outputs) {
    throw DimError("target matrix shape does not match inputs and outputs");
  }
  for (Index i = 0; i < T.rows(); ++i) {
    const bool binary = ((T.row(i).array() == 0.0) || (T.row(i).array() == 1.0)).all();
    if (!binary || T.row(i).sum() != 1.0) {
      throw TargetError("target row " + std::to_string(i) + " is not one-hot");
    }
  }

  const auto pass = run_forward(w, X);
  const Matrix log_prob = pass.logits.colwise() - pass.log_norm;
  LossAndGradient out;
  out.loss = -(T.array() * log_prob.array()).sum();

  // d loss / d logits = P - T.
  const Matrix d_logits = log_prob.array().exp().matrix() - T;
  NetworkWeights g = NetworkWeights::zeros(w.n_inputs, w.n_hidden, w.n_outputs);
  g.output_bias = d_logits.colwise().sum().transpose();
  if (w.n_hidden > 0) {
    g.output_weights = pass.hidden.transpose() * d_logits;
    const Matrix d_hidden = d_logits * w.output_weights.transpose();
    const Matrix d_activation =
        (d_hidden.array() * pass.hidden.array() * (1.0 - pass.hidden.array())).matrix();
    g.hidden_weights = X.transpose() * d_activation;
    g.hidden_bias = d_activation.colwise().sum().transpose();
  } else {
    g.output_weights = X.transpose() * d_logits;
  }
  out.gradient = g.flatten();
  return out;
}

Matrix one_hot(std::span<const int> labels, std::span<const int> classes) {
  Matrix T = Matrix::Zero(static_cast<Index>(labels.size()), static_cast<Index>(classes.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::find(classes.begin(), classes.end(), labels[i]);
    if (it == classes.end()) {
      throw TargetError("label " + std::to_string(labels[i]) + " is not a known class");
    }
    T(static_cast<Index>(i), it - classes.begin()) = 1.0;
  }
  return T;
}

std::vector<int> NnModel::predict(const Matrix& X) const {
  const auto winners = argmax_rows(probabilities(X));
  std::vector<int> out;
  out.reserve(winners.size());
  for (const Index k : winners) out.push_back(classes[static_cast<std::size_t>(k)]);
  return out;
}

NnModel train_nn(const Matrix& X, std::span<const int> labels, Index n_hidden,
                 const ScgOptions& options, std::uint64_t seed) {
  if (static_cast<Index>(labels.size()) != X.rows()) {
    throw DimError("label count does not match row count");
  }
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw EmptyClassError("training needs at least two classes");

  NnModel model;
  model.classes.assign(distinct.begin(), distinct.end());
  const Index d = X.cols();
  const auto K = static_cast<Index>(model.classes.size());
  const Matrix T = one_hot(labels, model.classes);

  const auto start = init_network(d, n_hidden, K, seed);
  const Objective objective = [&](const Vector& theta) {
    return nll_loss_and_gradient(NetworkWeights::unflatten(d, n_hidden, K, theta), X, T);
  };
  auto result = scg_minimize(objective, start.flatten(), options);
  model.weights = NetworkWeights::unflatten(d, n_hidden, K, result.theta);
  model.diagnostics = std::move(result.diagnostics);
  return model;
}

}  // namespace p300
