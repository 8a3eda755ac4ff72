#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daimon/common/errors.hpp"
#include "daimon/common/rng.hpp"

namespace daimon::del {

/// A point in {1..C}^m: predicted or true labels for the m test cases of a
/// C-class problem.
struct LabelVector {
  std::vector<std::int32_t> labels;
  std::int32_t num_classes = 0;

  std::size_t size() const { return labels.size(); }

  void validate() const {
    if (num_classes < 2) throw ContractViolation("LabelVector: need at least 2 classes");
    if (labels.empty()) throw ContractViolation("LabelVector: empty label vector");
    for (std::int32_t c : labels)
      if (c < 1 || c > num_classes)
        throw ContractViolation("LabelVector: label " + std::to_string(c) +
                                " outside [1, " + std::to_string(num_classes) + "]");
  }

  bool operator==(const LabelVector&) const = default;
};

/// Uniform draw from {1..C}^m.
inline LabelVector random_labels(std::size_t m, std::int32_t num_classes, Rng& rng) {
  LabelVector x;
  x.num_classes = num_classes;
  x.labels.resize(m);
  for (auto& c : x.labels)
    c = static_cast<std::int32_t>(rng.uniform_int(1, num_classes));
  return x;
}

/// Fraction of positions where the two vectors disagree.
inline double error_rate(const LabelVector& x, const LabelVector& x_t) {
  if (x.labels.size() != x_t.labels.size())
    throw ContractViolation("error_rate: label vectors differ in length");
  if (x.num_classes != x_t.num_classes)
    throw ContractViolation("error_rate: label vectors differ in class count");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < x.labels.size(); ++i)
    if (x.labels[i] != x_t.labels[i]) ++diff;
  return static_cast<double>(diff) / static_cast<double>(x.labels.size());
}

}  // namespace daimon::del
