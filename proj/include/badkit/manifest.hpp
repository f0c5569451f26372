#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/metrics.hpp"
#include "badkit/rng.hpp"

namespace badkit {

/// One dataset item: "itemid,hasbird[,path[,source]]". The label may be
/// empty (unlabeled test items); source distinguishes real rows from
/// pseudo-labeled ones.
struct ManifestRow {
  std::string item_id;
  std::optional<int> label;
  std::string path;
  std::string source = "real";
};

using Manifest = std::vector<ManifestRow>;

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline Manifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty manifest: " + path);
  const auto header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "itemid" || header.size() < 2 || header[1] != "hasbird")
    throw std::runtime_error("manifest header must start with 'itemid,hasbird': " + path);
  const bool has_path = header.size() > 2 && header[2] == "path";
  const bool has_source = header.size() > 3 && header[3] == "source";

  Manifest rows;
  std::map<std::string, bool> seen;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() < 2)
      throw std::runtime_error("manifest line " + std::to_string(line_no) + " malformed: " + path);
    ManifestRow row;
    row.item_id = fields[0];
    if (row.item_id.empty())
      throw std::runtime_error("manifest line " + std::to_string(line_no) + " has empty itemid");
    if (seen.count(row.item_id))
      throw std::runtime_error("duplicate itemid '" + row.item_id + "' in manifest: " + path);
    seen[row.item_id] = true;
    if (!fields[1].empty()) {
      if (fields[1] != "0" && fields[1] != "1")
        throw std::runtime_error("manifest line " + std::to_string(line_no) +
                                 ": hasbird must be 0 or 1, got '" + fields[1] + "'");
      row.label = fields[1] == "1" ? 1 : 0;
    }
    if (has_path && fields.size() > 2) row.path = fields[2];
    if (has_source && fields.size() > 3 && !fields[3].empty()) row.source = fields[3];
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_manifest(const std::string& path, const Manifest& rows) {
  bool any_path = false, any_pseudo = false;
  for (const auto& row : rows) {
    any_path |= !row.path.empty();
    any_pseudo |= row.source != "real";
  }
  const bool with_source = any_pseudo;
  const bool with_path = any_path || with_source;  // source is the 4th column

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest: " + path);
  os << "itemid,hasbird";
  if (with_path) os << ",path";
  if (with_source) os << ",source";
  os << "\n";
  for (const auto& row : rows) {
    os << row.item_id << ",";
    if (row.label) os << *row.label;
    if (with_path) os << "," << row.path;
    if (with_source) os << "," << row.source;
    os << "\n";
  }
  if (!os) throw std::runtime_error("failed writing manifest: " + path);
}

/// Seeded shuffle, then contiguous partition: floor for train and valid,
/// remainder to test.
struct SplitSpec {
  double train = 0.8, valid = 0.05, test = 0.15;
  std::uint64_t seed = 1234;

  void validate() const {
    if (train < 0 || valid < 0 || test < 0)
      throw std::invalid_argument("SplitSpec: proportions must be >= 0");
    if (std::abs(train + valid + test - 1.0) > 1e-9)
      throw std::invalid_argument("SplitSpec: proportions must sum to 1");
  }
};

struct SplitResult {
  Manifest train, valid, test;
};

inline SplitResult split_manifest(const Manifest& manifest, const SplitSpec& spec) {
  spec.validate();
  if (manifest.empty()) throw std::invalid_argument("split_manifest: empty manifest");
  Manifest shuffled = manifest;
  rng::Engine gen = rng::make_engine(spec.seed, 0x5b717 /* split */);
  rng::shuffle(shuffled, gen);
  const std::size_t n = shuffled.size();
  const std::size_t n_train = static_cast<std::size_t>(n * spec.train);
  const std::size_t n_valid = static_cast<std::size_t>(n * spec.valid);
  SplitResult out;
  out.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  out.valid.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_valid);
  out.test.assign(shuffled.begin() + n_train + n_valid, shuffled.end());
  return out;
}

// ----------------------------------------------------- prediction CSV I/O

inline PredictionSet read_predictions(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open predictions: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty predictions file: " + path);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "itemid" || header[1] != "probability")
    throw std::runtime_error("predictions header must start with 'itemid,probability': " + path);

  PredictionSet preds;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() < 2)
      throw std::runtime_error("predictions line " + std::to_string(line_no) + " malformed");
    PredRow row;
    row.item_id = fields[0];
    try {
      row.score = std::stod(fields[1]);
    } catch (const std::exception&) {
      throw std::runtime_error("predictions line " + std::to_string(line_no) +
                               ": bad probability '" + fields[1] + "'");
    }
    if (!std::isfinite(row.score))
      throw std::runtime_error("predictions line " + std::to_string(line_no) +
                               ": non-finite probability");
    preds.push_back(std::move(row));
  }
  return preds;
}

inline void write_predictions(const std::string& path, const PredictionSet& preds,
                              bool with_decisions = false, double threshold = 0.5) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write predictions: " + path);
  os.precision(9);
  os << (with_decisions ? "itemid,probability,decision\n" : "itemid,probability\n");
  for (const auto& row : preds) {
    os << row.item_id << "," << row.score;
    if (with_decisions) os << "," << (row.score >= threshold ? 1 : 0);
    os << "\n";
  }
  if (!os) throw std::runtime_error("failed writing predictions: " + path);
}

/// Copy labels from a manifest onto a prediction set (joined by item id).
inline void attach_labels(PredictionSet& preds, const Manifest& manifest) {
  std::map<std::string, std::optional<int>> labels;
  for (const auto& row : manifest) labels[row.item_id] = row.label;
  for (auto& row : preds) {
    auto it = labels.find(row.item_id);
    if (it == labels.end())
      throw std::runtime_error("prediction item not in manifest: " + row.item_id);
    if (!it->second) throw std::runtime_error("manifest item has no label: " + row.item_id);
    row.label = it->second;
  }
}

}  // namespace badkit
