#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/rng.hpp"

namespace badkit {

struct PredRow {
  std::string item_id;
  double score = 0.0;  // positive-class probability
  std::optional<int> label;
};

using PredictionSet = std::vector<PredRow>;

namespace detail {

struct Counts {
  std::size_t pos = 0, neg = 0;
};

inline Counts count_classes(const PredictionSet& preds) {
  Counts c;
  for (const auto& row : preds) {
    if (!row.label) throw std::invalid_argument("prediction row without label: " + row.item_id);
    (*row.label == 1 ? c.pos : c.neg)++;
  }
  return c;
}

}  // namespace detail

/// ROC-AUC by score-descending sweep with trapezoidal tie handling; equals
/// the Mann-Whitney pair statistic (ties count one half) exactly.
inline double roc_auc(const PredictionSet& preds) {
  const auto counts = detail::count_classes(preds);
  if (counts.pos == 0 || counts.neg == 0)
    throw std::invalid_argument("roc_auc: needs both classes present");

  std::vector<std::size_t> order(preds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  double area = 0.0;
  double tp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double dtp = 0.0, dfp = 0.0;
    while (j < order.size() && preds[order[j]].score == preds[order[i]].score) {
      (*preds[order[j]].label == 1 ? dtp : dfp) += 1.0;
      ++j;
    }
    area += dfp * (tp + 0.5 * dtp);  // trapezoid over the tie block
    tp += dtp;
    i = j;
  }
  return area / (static_cast<double>(counts.pos) * static_cast<double>(counts.neg));
}

/// ROC points ordered from (0,0) to (1,1), one point per distinct threshold.
inline std::vector<std::pair<double, double>> roc_curve(const PredictionSet& preds) {
  const auto counts = detail::count_classes(preds);
  if (counts.pos == 0 || counts.neg == 0)
    throw std::invalid_argument("roc_curve: needs both classes present");

  std::vector<std::size_t> order(preds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  std::vector<std::pair<double, double>> points;
  points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && preds[order[j]].score == preds[order[i]].score) {
      (*preds[order[j]].label == 1 ? tp : fp)++;
      ++j;
    }
    points.emplace_back(static_cast<double>(fp) / counts.neg,
                        static_cast<double>(tp) / counts.pos);
    i = j;
  }
  return points;
}

struct ConfusionReport {
  double acc = 0.0, tnr = 0.0, tpr = 0.0;
};

/// Decision rule: score >= threshold counts positive.
inline ConfusionReport confusion_metrics(const PredictionSet& preds, double threshold = 0.5) {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (const auto& row : preds) {
    if (!row.label) throw std::invalid_argument("prediction row without label: " + row.item_id);
    const bool decide_pos = row.score >= threshold;
    if (*row.label == 1)
      (decide_pos ? tp : fn)++;
    else
      (decide_pos ? fp : tn)++;
  }
  const std::size_t n = preds.size();
  if (n == 0) throw std::invalid_argument("confusion_metrics: empty prediction set");
  ConfusionReport r;
  r.acc = static_cast<double>(tp + tn) / static_cast<double>(n);
  r.tpr = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.tnr = (tn + fp) ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 0.0;
  return r;
}

enum class MetricKind { Auc, Acc, Tnr, Tpr };

inline double metric_value(MetricKind kind, const PredictionSet& preds) {
  switch (kind) {
    case MetricKind::Auc: return roc_auc(preds);
    case MetricKind::Acc: return confusion_metrics(preds).acc;
    case MetricKind::Tnr: return confusion_metrics(preds).tnr;
    case MetricKind::Tpr: return confusion_metrics(preds).tpr;
  }
  throw std::logic_error("unreachable metric kind");
}

namespace detail {
inline double percentile(std::vector<double> sorted_values, double q) {
  std::sort(sorted_values.begin(), sorted_values.end());
  const double pos = q * static_cast<double>(sorted_values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac;
}
}  // namespace detail

/// Nonparametric percentile bootstrap: n_resamples resamples of
/// resample_size rows drawn with replacement; single-class resamples are
/// redrawn (up to 10 attempts each). Returns the 2.5th and 97.5th
/// percentiles. Resample r uses its own RNG substream, so results do not
/// depend on evaluation order.
inline std::pair<double, double> bootstrap_ci(MetricKind kind, const PredictionSet& preds,
                                              std::size_t n_resamples = 100,
                                              std::size_t resample_size = 1000,
                                              std::uint64_t seed = 1234) {
  if (preds.empty()) throw std::invalid_argument("bootstrap_ci: empty prediction set");
  std::vector<double> values;
  values.reserve(n_resamples);
  PredictionSet resample(resample_size);
  for (std::size_t r = 0; r < n_resamples; ++r) {
    rng::Engine gen = rng::make_engine(seed, 0xb0070000ull + r);
    bool usable = false;
    for (int attempt = 0; attempt < 10 && !usable; ++attempt) {
      std::size_t pos = 0;
      for (std::size_t i = 0; i < resample_size; ++i) {
        resample[i] = preds[rng::uniform_index(gen, preds.size())];
        if (resample[i].label && *resample[i].label == 1) ++pos;
      }
      usable = pos > 0 && pos < resample_size;
    }
    if (usable) values.push_back(metric_value(kind, resample));
  }
  if (values.size() * 2 < n_resamples)
    throw std::runtime_error("bootstrap_ci: fewer than half of the resamples were usable");
  return {detail::percentile(values, 0.025), detail::percentile(values, 0.975)};
}

/// Normalized histogram over [0,1] with equal-width bins; heights sum to 1.
inline std::vector<double> probability_histogram(const PredictionSet& preds, std::size_t n_bins) {
  if (n_bins == 0) throw std::invalid_argument("probability_histogram: zero bins");
  std::vector<double> heights(n_bins, 0.0);
  if (preds.empty()) return heights;
  for (const auto& row : preds) {
    std::size_t bin = static_cast<std::size_t>(row.score * static_cast<double>(n_bins));
    if (bin >= n_bins) bin = n_bins - 1;  // score == 1.0 goes in the last bin
    heights[bin] += 1.0;
  }
  for (auto& h : heights) h /= static_cast<double>(preds.size());
  return heights;
}

/// Point value plus 95% bootstrap CI for the four challenge metrics.
struct MetricReport {
  struct Row {
    double value = 0.0, ci_low = 0.0, ci_high = 0.0;
  };
  Row auc, acc, tnr, tpr;
};

inline MetricReport full_report(const PredictionSet& preds, std::size_t n_resamples = 100,
                                std::size_t resample_size = 1000, std::uint64_t seed = 1234) {
  MetricReport rep;
  const ConfusionReport conf = confusion_metrics(preds);
  rep.auc.value = roc_auc(preds);
  rep.acc.value = conf.acc;
  rep.tnr.value = conf.tnr;
  rep.tpr.value = conf.tpr;
  auto fill = [&](MetricKind kind, MetricReport::Row& row) {
    const auto [lo, hi] = bootstrap_ci(kind, preds, n_resamples, resample_size, seed);
    row.ci_low = lo;
    row.ci_high = hi;
  };
  fill(MetricKind::Auc, rep.auc);
  fill(MetricKind::Acc, rep.acc);
  fill(MetricKind::Tnr, rep.tnr);
  fill(MetricKind::Tpr, rep.tpr);
  return rep;
}

}  // namespace badkit
