#pragma once

#include <functional>
#include <string>
#include <vector>

#include "p300/data_model.hpp"

namespace p300 {

struct LossAndGradient {
  double loss = 0.0;
  Vector gradient;
};

using Objective = std::function<LossAndGradient(const Vector&)>;

struct ScgOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;
  double initial_lambda = 1e-6;
  // Step scale for the finite-difference estimate of the curvature along p.
  double sigma = 1e-4;
  // Relative: stop once an accepted step changes the loss by no more than
  // loss_tolerance * max(|E_old|, |E_new|).
  double loss_tolerance = 1e-9;

  // ConfigError unless sigma, lambda > 0, tolerances >= 0, iterations >= 0.
  void validate() const;
};

enum class ScgStop { GradientTolerance, LossTolerance, MaxIterations };

std::string to_string(ScgStop stop);

struct ScgDiagnostics {
  int iterations = 0;
  int evaluations = 0;
  double final_loss = 0.0;
  double gradient_norm = 0.0;
  ScgStop reason = ScgStop::MaxIterations;
  // Loss at the start point followed by the loss after each accepted step.
  std::vector<double> accepted_losses;
};

struct ScgResult {
  Vector theta;
  ScgDiagnostics diagnostics;
};

// Moller's scaled conjugate gradient. Each iteration estimates the curvature
// along the search direction by a forward difference of gradients, scales it
// by a trust-region parameter lambda, takes the resulting step if the loss
// does not increase, and updates lambda from the ratio of actual to predicted
// reduction. The direction is reset to steepest descent every
// theta.size() accepted steps. NumericalError on non-finite loss or gradient.
ScgResult scg_minimize(const Objective& objective, Vector theta0,
                       const ScgOptions& options = {});

}  // namespace p300
