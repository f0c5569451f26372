#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/manifest.hpp"
#include "badkit/metrics.hpp"

namespace badkit {

enum class EnsembleMethod { Geometric, Arithmetic, Harmonic };

inline EnsembleMethod ensemble_method_from_string(const std::string& s) {
  if (s == "geometric") return EnsembleMethod::Geometric;
  if (s == "arithmetic") return EnsembleMethod::Arithmetic;
  if (s == "harmonic") return EnsembleMethod::Harmonic;
  throw std::invalid_argument("unknown ensemble method: " + s);
}

/// Combine the positive-class scores of several aligned prediction sets.
/// Scores are clamped to [clamp_eps, 1-clamp_eps] first so a single zero
/// cannot annihilate the geometric mean. Output rows follow the first
/// member's order; no renormalization over classes is performed.
inline PredictionSet combine(const std::vector<PredictionSet>& members, EnsembleMethod method,
                             double clamp_eps = 1e-7) {
  if (members.size() < 2) throw std::invalid_argument("combine: need at least 2 members");
  const std::size_t n = members.front().size();
  std::vector<std::map<std::string, double>> by_id(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (members[m].size() != n)
      throw std::invalid_argument("combine: member " + std::to_string(m) +
                                  " has a different item count");
    for (const auto& row : members[m]) {
      if (!by_id[m].emplace(row.item_id, row.score).second)
        throw std::invalid_argument("combine: duplicate item id " + row.item_id);
    }
  }

  const double k = static_cast<double>(members.size());
  PredictionSet out;
  out.reserve(n);
  for (const auto& first_row : members.front()) {
    double log_sum = 0.0, sum = 0.0, inv_sum = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto it = by_id[m].find(first_row.item_id);
      if (it == by_id[m].end())
        throw std::invalid_argument("combine: item '" + first_row.item_id +
                                    "' missing from member " + std::to_string(m));
      const double s = std::clamp(it->second, clamp_eps, 1.0 - clamp_eps);
      log_sum += std::log(s);
      sum += s;
      inv_sum += 1.0 / s;
    }
    PredRow row;
    row.item_id = first_row.item_id;
    switch (method) {
      case EnsembleMethod::Geometric: row.score = std::exp(log_sum / k); break;
      case EnsembleMethod::Arithmetic: row.score = sum / k; break;
      case EnsembleMethod::Harmonic: row.score = k / inv_sum; break;
    }
    out.push_back(std::move(row));
  }
  return out;
}

/// Confidence thresholds for pseudo-labeling; strict inequalities.
struct PseudoLabelConfig {
  double low_threshold = 0.3;
  double high_threshold = 0.7;

  void validate() const {
    if (!(0.0 < low_threshold && low_threshold < high_threshold && high_threshold < 1.0))
      throw std::invalid_argument("PseudoLabelConfig: need 0 < low < high < 1");
  }
};

/// Keep only confident predictions: score < low gets label 0, score > high
/// gets label 1, everything in [low, high] (boundaries included) is dropped.
inline Manifest pseudo_label_select(const PredictionSet& preds, const PseudoLabelConfig& cfg) {
  cfg.validate();
  Manifest out;
  for (const auto& row : preds) {
    if (row.score < cfg.low_threshold) {
      out.push_back({row.item_id, 0, "", "pseudo"});
    } else if (row.score > cfg.high_threshold) {
      out.push_back({row.item_id, 1, "", "pseudo"});
    }
  }
  return out;
}

/// Concatenate pseudo-labeled rows onto a training manifest. Item ids must
/// be disjoint; every row keeps its provenance in the source column.
inline Manifest merge_pseudo_into_training(const Manifest& train_set, const Manifest& pseudo) {
  std::set<std::string> ids;
  for (const auto& row : train_set) ids.insert(row.item_id);
  Manifest out = train_set;
  for (const auto& row : pseudo) {
    if (!ids.insert(row.item_id).second)
      throw std::invalid_argument("merge_pseudo_into_training: item id collision: " + row.item_id);
    ManifestRow r = row;
    r.source = "pseudo";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace badkit
