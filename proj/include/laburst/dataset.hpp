#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "laburst/features.hpp"

namespace laburst {

enum class Provenance { Seed, Stopword, SelfTrain };
const char* provenance_name(Provenance p);

struct LabeledExample {
  std::array<double, kFeatureCount> raw{};
  std::array<double, kFeatureCount> normalized{};
  bool bursty = false;
  Provenance provenance = Provenance::Seed;
  std::string token;
  std::int64_t window_end = 0;
};

// Dense numeric training matrix; labels are +1 (bursty) / -1.
struct Dataset {
  std::size_t dims = 0;
  std::vector<double> x;  // row-major, rows() * dims
  std::vector<int> y;

  std::size_t rows() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * dims, dims};
  }
  void add_row(std::span<const double> values, int label) {
    x.insert(x.end(), values.begin(), values.end());
    y.push_back(label);
  }
  bool has_both_classes() const;
};

Dataset to_dataset(std::span<const LabeledExample> examples);

}  // namespace laburst
