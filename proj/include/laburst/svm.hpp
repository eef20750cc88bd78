#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "laburst/dataset.hpp"

namespace laburst {

struct SvmConfig {
  double c = 64.0;
  double gamma = 0.0625;
  double tol = 1e-3;
  int max_passes = 2000;  // full sweeps over the data
};

// Soft-margin RBF SVM trained by sequential minimal optimization.
// Support vectors keep full-width rows; the kernel runs over feature_mask
// dimensions only.
struct SvmModel {
  SvmConfig cfg;
  std::size_t dims = 0;
  std::vector<int> feature_mask;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coef;  // alpha_i * y_i per support vector
  double bias = 0.0;
  bool converged = true;

  // f(x) = sum coef_i K(sv_i, x) + bias
  double decision(std::span<const double> x) const;
  // logistic(f(x))
  double predict_score(std::span<const double> x) const;
  bool classify(std::span<const double> x) const {
    return predict_score(x) >= 0.5;
  }
};

// Per-example weights scale the box constraint (C_i = c * n * w_i); uniform
// when empty. Non-convergence within max_passes returns the best iterate
// with converged = false. Throws std::invalid_argument on single-class data.
SvmModel train_svm_rbf(const Dataset& data, const SvmConfig& cfg,
                       std::span<const int> feature_mask = {},
                       std::span<const double> weights = {});

}  // namespace laburst
