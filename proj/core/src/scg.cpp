#include "p300/scg.hpp"

#include <algorithm>
#include <cmath>

#include "p300/errors.hpp"

namespace p300 {

void ScgOptions::validate() const {
  if (max_iterations < 0) throw ConfigError("SCG max_iterations must be >= 0");
  if (!(gradient_tolerance >= 0.0) || !(loss_tolerance >= 0.0)) {
    throw ConfigError("SCG tolerances must be >= 0");
  }
  if (!(initial_lambda > 0.0) || !(sigma > 0.0)) {
    throw ConfigError("SCG lambda and sigma must be > 0");
  }
}

std::string to_string(ScgStop stop) {
  switch (stop) {
    case ScgStop::GradientTolerance: return "gradient_tolerance";
    case ScgStop::LossTolerance: return "loss_tolerance";
    case ScgStop::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

LossAndGradient evaluate(const Objective& objective, const Vector& theta, int iteration,
                         int& evaluations) {
  auto value = objective(theta);
  ++evaluations;
  if (!std::isfinite(value.loss) || !value.gradient.allFinite()) {
    throw NumericalError("non-finite loss or gradient at SCG iteration " +
                         std::to_string(iteration));
  }
  if (value.gradient.size() != theta.size()) {
    throw DimError("objective gradient has the wrong length");
  }
  return value;
}

}  // namespace

ScgResult scg_minimize(const Objective& objective, Vector theta0,
                       const ScgOptions& options) {
  options.validate();
  ScgResult result;
  auto& diag = result.diagnostics;
  Vector w = std::move(theta0);
  if (!w.allFinite()) throw NumericalError("SCG start point is not finite");

  auto current = evaluate(objective, w, 0, diag.evaluations);
  double loss = current.loss;
  Vector grad = std::move(current.gradient);
  Vector r = -grad;
  Vector p = r;
  diag.accepted_losses.push_back(loss);

  const auto n_params = static_cast<int>(w.size());
  double lambda = options.initial_lambda;
  double lambda_bar = 0.0;
  double delta = 0.0;
  bool success = true;
  int accepted_since_restart = 0;
  diag.reason = ScgStop::MaxIterations;

  if (r.norm() <= options.gradient_tolerance) {
    diag.reason = ScgStop::GradientTolerance;
  } else {
    for (int it = 1; it <= options.max_iterations; ++it) {
      diag.iterations = it;
      double p_sq = p.squaredNorm();
      double mu = p.dot(r);
      if (mu <= 0.0) {
        // Not a descent direction; fall back to steepest descent.
        p = r;
        p_sq = p.squaredNorm();
        mu = p_sq;
        success = true;
        accepted_since_restart = 0;
      }

      if (success) {
        const double step = options.sigma / std::sqrt(p_sq);
        const auto probe = evaluate(objective, w + step * p, it, diag.evaluations);
        delta = p.dot(probe.gradient - grad) / step;
      }

      delta += (lambda - lambda_bar) * p_sq;
      if (delta <= 0.0) {
        lambda_bar = 2.0 * (lambda - delta / p_sq);
        delta = -delta + lambda * p_sq;
        lambda = lambda_bar;
      }

      const double alpha = mu / delta;
      Vector w_new = w + alpha * p;
      auto trial = evaluate(objective, w_new, it, diag.evaluations);
      const double comparison = 2.0 * delta * (loss - trial.loss) / (mu * mu);

      bool stop = false;
      if (comparison >= 0.0) {
        const double previous_loss = loss;
        w = std::move(w_new);
        loss = trial.loss;
        grad = std::move(trial.gradient);
        const Vector r_old = std::move(r);
        r = -grad;
        lambda_bar = 0.0;
        success = true;
        ++accepted_since_restart;
        diag.accepted_losses.push_back(loss);

        if (r.norm() <= options.gradient_tolerance) {
          diag.reason = ScgStop::GradientTolerance;
          stop = true;
        } else if (std::abs(previous_loss - loss) <=
                   options.loss_tolerance *
                       std::max(std::abs(previous_loss), std::abs(loss))) {
          diag.reason = ScgStop::LossTolerance;
          stop = true;
        }

        if (accepted_since_restart >= n_params) {
          p = r;
          accepted_since_restart = 0;
        } else {
          const double beta = (r.squaredNorm() - r.dot(r_old)) / mu;
          p = r + beta * p;
        }
        if (comparison >= 0.75) lambda *= 0.25;
      } else {
        lambda_bar = lambda;
        success = false;
      }

      if (comparison < 0.25) lambda += delta * (1.0 - comparison) / p_sq;
      if (stop) break;
    }
  }

  diag.final_loss = loss;
  diag.gradient_norm = grad.norm();
  result.theta = std::move(w);
  return result;
}

}  // namespace p300
