#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "badkit/rng.hpp"
#include "badkit/tensor.hpp"

namespace badkit {

/// Result of comparing analytic gradients against central finite differences.
struct GradCheckReport {
  struct Entry {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t checked = 0;
  };
  std::vector<Entry> entries;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline double gradcheck_rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-12});
}

/// One tensor to perturb plus its analytic gradient (computed by the caller
/// with a single backward pass before the check).
struct GradCheckItem {
  std::string name;
  Tensor<double>* value;
  const Tensor<double>* analytic;
};

/// Central differences with the given step on every element (or a seeded
/// random subsample above max_elements). The objective must be a
/// deterministic function of the item values. Run in double precision;
/// 32-bit difference noise exceeds the tolerance.
inline GradCheckReport finite_difference_check(const std::function<double()>& objective,
                                               const std::vector<GradCheckItem>& items,
                                               double tolerance, double step = 1e-5,
                                               std::size_t max_elements = 10000,
                                               std::uint64_t seed = 1234) {
  GradCheckReport report;
  report.tolerance = tolerance;
  rng::Engine gen = rng::make_engine(seed, 0x67636b /* "gck" */);

  for (const auto& item : items) {
    GradCheckReport::Entry entry;
    entry.name = item.name;
    const std::size_t n = item.value->size();
    std::vector<std::size_t> indices;
    if (n <= max_elements) {
      indices.resize(n);
      for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    } else {
      indices.resize(max_elements);
      for (auto& idx : indices) idx = rng::uniform_index(gen, n);
    }
    for (std::size_t idx : indices) {
      double& slot = item.value->data[idx];
      const double saved = slot;
      slot = saved + step;
      const double f_plus = objective();
      slot = saved - step;
      const double f_minus = objective();
      slot = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double rel = gradcheck_rel_error(item.analytic->data[idx], numeric);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
      ++entry.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

}  // namespace badkit
