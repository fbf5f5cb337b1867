#include "cbnn/wine_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cbnn/errors.hpp"
#include "cbnn/random.hpp"

namespace cbnn {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
      !std::isfinite(value)) {
    throw ParseError("non-numeric field '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace

Dataset load_wine(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());

  std::vector<std::array<double, kNumFeatures>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = view.find(',', start);
      fields.push_back(view.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != kNumFeatures + 1) {
      throw ParseError("expected " + std::to_string(kNumFeatures + 1) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    double label = parse_number(fields[0], line_no);
    if (label != 1.0 && label != 2.0 && label != 3.0) {
      throw ParseError("class label must be 1, 2 or 3", line_no);
    }
    std::array<double, kNumFeatures> row{};
    for (int f = 0; f < kNumFeatures; ++f) row[f] = parse_number(fields[f + 1], line_no);
    rows.push_back(row);
    labels.push_back(static_cast<int>(label) - 1);
  }
  if (rows.empty()) throw ParseError("dataset file contains no samples: " + path.string());

  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), kNumFeatures);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int f = 0; f < kNumFeatures; ++f) ds.features(static_cast<Eigen::Index>(r), f) = rows[r][f];
  ds.labels = std::move(labels);
  ds.sample_ids.resize(ds.labels.size());
  std::iota(ds.sample_ids.begin(), ds.sample_ids.end(), 0);
  return ds;
}

Dataset normalize(const Dataset& ds) {
  if (ds.size() < 1) throw std::invalid_argument("normalize: empty dataset");
  Dataset out = ds;
  for (int f = 0; f < kNumFeatures; ++f) {
    const double lo = ds.features.col(f).minCoeff();
    const double hi = ds.features.col(f).maxCoeff();
    if (hi > lo) {
      out.features.col(f) = (ds.features.col(f).array() - lo) / (hi - lo);
    } else {
      out.features.col(f).setZero();
    }
  }
  return out;
}

std::array<int, kNumClasses> class_histogram(const Dataset& ds) {
  std::array<int, kNumClasses> h{};
  for (int label : ds.labels) ++h.at(label);
  return h;
}

Dataset subset(const Dataset& ds, const std::vector<int>& idx) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), kNumFeatures);
  out.labels.reserve(idx.size());
  out.sample_ids.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.features.row(static_cast<Eigen::Index>(k)) = ds.features.row(idx[k]);
    out.labels.push_back(ds.labels[idx[k]]);
    out.sample_ids.push_back(ds.sample_ids[idx[k]]);
  }
  return out;
}

TrainTestSplit split(const Dataset& ds, std::uint64_t seed) {
  if (ds.size() != kWineSamples) {
    throw std::invalid_argument("split: expected " + std::to_string(kWineSamples) +
                                " samples, got " + std::to_string(ds.size()));
  }
  std::array<std::vector<int>, kNumClasses> by_class;
  for (int k = 0; k < ds.size(); ++k) by_class[ds.labels[k]].push_back(k);

  // Largest-remainder allocation of the 30 test slots across classes.
  std::array<int, kNumClasses> quota{};
  std::array<double, kNumClasses> remainder{};
  int assigned = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    double exact = static_cast<double>(kWineTestSamples) * by_class[c].size() / ds.size();
    quota[c] = static_cast<int>(std::floor(exact));
    remainder[c] = exact - quota[c];
    assigned += quota[c];
  }
  while (assigned < kWineTestSamples) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (remainder[c] > remainder[best]) best = c;
    ++quota[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  Rng rng(derive_seed(seed, "wine-split"));
  std::vector<int> train_idx, test_idx;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<int> members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + quota[c]);
    train_idx.insert(train_idx.end(), members.begin() + quota[c], members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {subset(ds, train_idx), subset(ds, test_idx)};
}

TrainTestSplit load_wine_split(const std::filesystem::path& path, std::uint64_t split_seed) {
  Dataset raw = load_wine(path);
  const auto hist = class_histogram(raw);
  if (raw.size() != kWineSamples || hist != std::array<int, kNumClasses>{59, 71, 48}) {
    throw ParseError("dataset does not match the UCI Wine class histogram {59, 71, 48}");
  }
  return split(normalize(raw), split_seed);
}

}  // namespace cbnn
