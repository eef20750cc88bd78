#include "laburst/svm.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <stdexcept>
#include <unordered_map>

namespace laburst {
namespace {

double rbf(std::span<const double> a, std::span<const double> b,
           std::span<const int> mask, double gamma) {
  double d2 = 0.0;
  for (const int f : mask) {
    const double d = a[f] - b[f];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

// Lazily computed kernel rows with LRU eviction, bounded to ~64 MB.
class KernelCache {
 public:
  KernelCache(const Dataset& data, std::span<const int> mask, double gamma)
      : data_(data), mask_(mask), gamma_(gamma) {
    const std::size_t n = data.rows();
    const std::size_t budget = (64ull << 20) / (sizeof(double) * std::max<std::size_t>(n, 1));
    max_rows_ = std::max<std::size_t>(16, std::min(n, budget));
  }

  const std::vector<double>& row(std::size_t i) {
    auto it = rows_.find(i);
    if (it != rows_.end()) {
      order_.splice(order_.begin(), order_, it->second.first);
      return it->second.second;
    }
    if (rows_.size() >= max_rows_) {
      const std::size_t victim = order_.back();
      order_.pop_back();
      rows_.erase(victim);
    }
    order_.push_front(i);
    std::vector<double> values(data_.rows());
    const auto xi = data_.row(i);
    for (std::size_t j = 0; j < data_.rows(); ++j) {
      values[j] = rbf(xi, data_.row(j), mask_, gamma_);
    }
    auto [slot, inserted] =
        rows_.emplace(i, std::make_pair(order_.begin(), std::move(values)));
    return slot->second.second;
  }

 private:
  const Dataset& data_;
  std::span<const int> mask_;
  double gamma_;
  std::size_t max_rows_;
  std::list<std::size_t> order_;
  std::unordered_map<std::size_t,
                     std::pair<std::list<std::size_t>::iterator,
                               std::vector<double>>>
      rows_;
};

struct Solver {
  const Dataset& data;
  const SvmConfig& cfg;
  std::span<const int> mask;
  std::vector<double> cap;    // per-example upper bound C_i
  std::vector<double> alpha;
  std::vector<double> error;  // f(x_i) - y_i
  double b = 0.0;
  KernelCache cache;

  Solver(const Dataset& d, const SvmConfig& c, std::span<const int> m,
         std::span<const double> weights)
      : data(d), cfg(c), mask(m), cache(d, m, c.gamma) {
    const std::size_t n = d.rows();
    alpha.assign(n, 0.0);
    error.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      error[i] = -static_cast<double>(d.y[i]);
    }
    cap.resize(n);
    if (weights.empty()) {
      std::fill(cap.begin(), cap.end(), cfg.c);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        cap[i] = cfg.c * static_cast<double>(n) * weights[i];
      }
    }
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double y1 = data.y[i1], y2 = data.y[i2];
    const double a1 = alpha[i1], a2 = alpha[i2];
    const double e1 = error[i1], e2 = error[i2];

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(cap[i2], cap[i1] + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - cap[i1]);
      hi = std::min(cap[i2], a1 + a2);
    }
    if (lo >= hi) return false;

    const auto& row1 = cache.row(i1);
    const double k11 = row1[i1];
    const double k12 = row1[i2];
    const auto& row2 = cache.row(i2);
    const double k22 = row2[i2];
    const double eta = k11 + k22 - 2.0 * k12;

    double a2_new;
    if (eta > 1e-15) {
      a2_new = a2 + y2 * (e1 - e2) / eta;
      a2_new = std::clamp(a2_new, lo, hi);
    } else {
      // Zero curvature (coincident points in the masked dimensions): the
      // dual objective is linear in a2 along the constraint with slope
      // y2 (E1 - E2); move to whichever bound improves it.
      const double slope = y2 * (e1 - e2);
      if (slope > 1e-12) a2_new = hi;
      else if (slope < -1e-12) a2_new = lo;
      else return false;
    }
    if (std::abs(a2_new - a2) < 1e-8 * (a2_new + a2 + 1e-8)) return false;

    const double a1_new = a1 + y1 * y2 * (a2 - a2_new);
    const double d1 = y1 * (a1_new - a1);
    const double d2 = y2 * (a2_new - a2);

    const double b1 = b - e1 - d1 * k11 - d2 * k12;
    const double b2 = b - e2 - d1 * k12 - d2 * k22;
    double b_new;
    if (a1_new > 0.0 && a1_new < cap[i1]) b_new = b1;
    else if (a2_new > 0.0 && a2_new < cap[i2]) b_new = b2;
    else b_new = (b1 + b2) / 2.0;

    alpha[i1] = a1_new;
    alpha[i2] = a2_new;
    const double db = b_new - b;
    b = b_new;
    for (std::size_t j = 0; j < data.rows(); ++j) {
      error[j] += d1 * row1[j] + d2 * row2[j] + db;
    }
    return true;
  }

  bool violates_kkt(std::size_t i) const {
    const double r = error[i] * data.y[i];
    return (r < -cfg.tol && alpha[i] < cap[i]) ||
           (r > cfg.tol && alpha[i] > 0.0);
  }

  bool examine(std::size_t i2) {
    if (!violates_kkt(i2)) return false;

    // Second-choice heuristic: maximum |E1 - E2| over non-bound points.
    std::size_t best = i2;
    double best_gap = -1.0;
    for (std::size_t j = 0; j < data.rows(); ++j) {
      if (alpha[j] <= 0.0 || alpha[j] >= cap[j]) continue;
      const double gap = std::abs(error[j] - error[i2]);
      if (gap > best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best != i2 && take_step(best, i2)) return true;

    // Fall back to scanning non-bound points, then everything, from a
    // deterministic rotating offset.
    const std::size_t n = data.rows();
    const std::size_t start = scan_offset_++ % n;
    for (std::size_t d = 0; d < n; ++d) {
      const std::size_t j = (start + d) % n;
      if (alpha[j] > 0.0 && alpha[j] < cap[j] && take_step(j, i2)) return true;
    }
    for (std::size_t d = 0; d < n; ++d) {
      const std::size_t j = (start + d) % n;
      if (take_step(j, i2)) return true;
    }
    return false;
  }

  std::size_t scan_offset_ = 0;
};

}  // namespace

double SvmModel::decision(std::span<const double> x) const {
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) {
    f += coef[i] * rbf(support_vectors[i], x, feature_mask, cfg.gamma);
  }
  return f;
}

double SvmModel::predict_score(std::span<const double> x) const {
  return 1.0 / (1.0 + std::exp(-decision(x)));
}

SvmModel train_svm_rbf(const Dataset& data, const SvmConfig& cfg,
                       std::span<const int> feature_mask,
                       std::span<const double> weights) {
  if (!data.has_both_classes()) {
    throw std::invalid_argument("train_svm_rbf: both classes required");
  }
  std::vector<int> mask(feature_mask.begin(), feature_mask.end());
  if (mask.empty()) {
    for (std::size_t i = 0; i < data.dims; ++i) mask.push_back((int)i);
  }

  Solver solver(data, cfg, mask, weights);
  const std::size_t n = data.rows();

  bool examine_all = true;
  int passes = 0;
  bool converged = false;
  while (passes < cfg.max_passes) {
    ++passes;
    std::size_t changed = 0;
    if (examine_all) {
      for (std::size_t i = 0; i < n; ++i) changed += solver.examine(i) ? 1 : 0;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (solver.alpha[i] > 0.0 && solver.alpha[i] < solver.cap[i]) {
          changed += solver.examine(i) ? 1 : 0;
        }
      }
    }
    if (examine_all) {
      if (changed == 0) {
        converged = true;
        break;
      }
      examine_all = false;
    } else if (changed == 0) {
      examine_all = true;
    }
  }

  SvmModel model;
  model.cfg = cfg;
  model.dims = data.dims;
  model.feature_mask = std::move(mask);
  model.bias = solver.b;
  model.converged = converged;
  for (std::size_t i = 0; i < n; ++i) {
    if (solver.alpha[i] > 1e-12) {
      const auto r = data.row(i);
      model.support_vectors.emplace_back(r.begin(), r.end());
      model.coef.push_back(solver.alpha[i] * data.y[i]);
    }
  }
  return model;
}

}  // namespace laburst
