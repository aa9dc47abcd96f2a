#include "margin_forge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "margin_forge/error.hpp"
#include "margin_forge/rng.hpp"

namespace margin_forge {

Dataset::Dataset(std::string name, std::size_t rows, std::size_t cols, std::vector<double> features,
                 std::vector<int> labels, std::vector<std::string> feature_names)
    : name_(std::move(name)),
      rows_(rows),
      cols_(cols),
      features_(std::move(features)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)) {
  validate();
}

void Dataset::validate() const {
  if (rows_ == 0 || cols_ == 0) throw DataError("dataset must have at least one row and one column");
  if (features_.size() != rows_ * cols_) throw DataError("feature buffer does not match n x p");
  if (labels_.size() != rows_) throw DataError("label count does not match row count");
  if (!feature_names_.empty() && feature_names_.size() != cols_)
    throw DataError("feature name count does not match column count");
  for (int y : labels_)
    if (y != -1 && y != 1) throw DataError("labels must be -1 or +1");
  for (double v : features_)
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
}

std::size_t Dataset::count_label(int y) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), y));
}

void Dataset::require_both_classes() const {
  if (!has_both_classes()) throw DataError("dataset '" + name_ + "' must contain both classes");
}

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string name) const {
  std::vector<double> feats;
  std::vector<int> labs;
  feats.reserve(indices.size() * cols_);
  labs.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= rows_) throw DataError("subset index out of range");
    auto r = row(i);
    feats.insert(feats.end(), r.begin(), r.end());
    labs.push_back(labels_[i]);
  }
  return Dataset(name.empty() ? name_ : std::move(name), indices.size(), cols_, std::move(feats),
                 std::move(labs), feature_names_);
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n\"'");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n\"'");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, delim)) out.push_back(trim(field));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

bool is_missing(const std::string& tok) { return tok.empty() || tok == "?" || tok == "NA" || tok == "NaN"; }

// Maps a two-valued raw label set onto {-1,+1}: smaller raw label -> -1.
std::vector<int> map_labels(const std::vector<std::string>& raw, const std::filesystem::path& path) {
  std::set<std::string> distinct(raw.begin(), raw.end());
  if (distinct.size() > 2)
    throw DataError(path.string() + ": more than two classes (" + std::to_string(distinct.size()) +
                    " distinct labels)");
  std::vector<std::string> vals(distinct.begin(), distinct.end());
  if (vals.size() == 2) {
    auto a = parse_number(vals[0]);
    auto b = parse_number(vals[1]);
    if (a && b && *b < *a) std::swap(vals[0], vals[1]);
  }
  std::vector<int> labels;
  labels.reserve(raw.size());
  if (vals.size() == 1) {
    // Single class file: sign of a numeric label decides, otherwise +1.
    auto v = parse_number(vals[0]);
    int y = (v && *v <= 0.0) ? -1 : 1;
    labels.assign(raw.size(), y);
    return labels;
  }
  for (const auto& r : raw) labels.push_back(r == vals[0] ? -1 : 1);
  return labels;
}

Dataset load_delimited(const std::filesystem::path& path, const LoadOptions& opt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw DataError(path.string() + ": empty file");

  char delim = opt.delimiter;
  if (delim == 0) delim = lines.front().find('\t') != std::string::npos ? '\t' : ',';

  auto first = split_fields(lines.front(), delim);
  const std::size_t ncols = first.size();
  if (ncols < 2) throw DataError(path.string() + ": need at least one feature column and a label column");
  int lc = opt.label_column < 0 ? static_cast<int>(ncols) + opt.label_column : opt.label_column;
  if (lc < 0 || lc >= static_cast<int>(ncols)) throw DataError(path.string() + ": label column out of range");
  const auto label_col = static_cast<std::size_t>(lc);

  bool header = false;
  if (opt.header) {
    header = *opt.header;
  } else {
    for (std::size_t j = 0; j < ncols; ++j)
      if (j != label_col && !parse_number(first[j]) && !is_missing(first[j])) header = true;
  }

  std::vector<std::string> names;
  if (header) {
    for (std::size_t j = 0; j < ncols; ++j)
      if (j != label_col) names.push_back(first[j]);
  }

  std::vector<double> feats;
  std::vector<std::string> raw_labels;
  for (std::size_t li = header ? 1 : 0; li < lines.size(); ++li) {
    auto fields = split_fields(lines[li], delim);
    const std::string where = path.string() + ":" + std::to_string(li + 1);
    if (fields.size() != ncols) throw DataError(where + ": expected " + std::to_string(ncols) + " fields");
    for (std::size_t j = 0; j < ncols; ++j) {
      if (is_missing(fields[j])) throw DataError(where + ": missing value");
      if (j == label_col) continue;
      auto v = parse_number(fields[j]);
      if (!v) throw DataError(where + ": non-numeric feature token '" + fields[j] + "'");
      feats.push_back(*v);
    }
    raw_labels.push_back(fields[label_col]);
  }
  if (raw_labels.empty()) throw DataError(path.string() + ": empty file");
  auto labels = map_labels(raw_labels, path);
  const std::size_t n = labels.size();
  return Dataset(path.stem().string(), n, ncols - 1, std::move(feats), std::move(labels), std::move(names));
}

Dataset load_sparse(const std::filesystem::path& path, const LoadOptions& opt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<std::pair<std::size_t, double>>> records;
  std::vector<std::string> raw_labels;
  std::size_t max_index = 0;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream is(line);
    std::string tok;
    if (!(is >> tok)) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    raw_labels.push_back(trim(tok));
    auto& rec = records.emplace_back();
    while (is >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos) throw DataError(where + ": malformed token '" + tok + "'");
      auto idx = parse_number(tok.substr(0, colon));
      auto val = parse_number(tok.substr(colon + 1));
      if (!idx || *idx < 1 || std::floor(*idx) != *idx) throw DataError(where + ": bad feature index in '" + tok + "'");
      if (!val) throw DataError(where + ": non-numeric feature token '" + tok + "'");
      auto k = static_cast<std::size_t>(*idx);
      max_index = std::max(max_index, k);
      rec.emplace_back(k - 1, *val);
    }
  }
  if (records.empty()) throw DataError(path.string() + ": empty file");
  std::size_t p = opt.sparse_dim ? opt.sparse_dim : max_index;
  if (p == 0) throw DataError(path.string() + ": no features");
  if (max_index > p) throw DataError(path.string() + ": feature index exceeds declared dimension");
  std::vector<double> feats(records.size() * p, 0.0);
  for (std::size_t i = 0; i < records.size(); ++i)
    for (auto [j, v] : records[i]) feats[i * p + j] = v;
  auto labels = map_labels(raw_labels, path);
  const std::size_t n = labels.size();
  return Dataset(path.stem().string(), n, p, std::move(feats), std::move(labels));
}

}  // namespace

FileFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".svm" || ext == ".libsvm" || ext == ".sparse") return FileFormat::kSparseIndex;
  return FileFormat::kDelimited;
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
  const auto format = options.format == FileFormat::kAuto ? format_from_path(path) : options.format;
  return format == FileFormat::kSparseIndex ? load_sparse(path, options) : load_delimited(path, options);
}

void write_delimited(const Dataset& data, const std::filesystem::path& path, char delimiter) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  for (std::size_t j = 0; j < data.cols(); ++j)
    out << (data.feature_names().empty() ? "x" + std::to_string(j + 1) : data.feature_names()[j]) << delimiter;
  out << "label\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (double v : data.row(i)) out << v << delimiter;
    out << data.label(i) << '\n';
  }
}

Split stratified_split(const Dataset& data, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw DataError("train fraction must lie in (0,1)");
  Rng rng(derive_seed(spec.seed, 0x5e11));
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;

  auto take = [&](std::vector<std::size_t> pool) {
    std::shuffle(pool.begin(), pool.end(), rng);
    auto k = static_cast<std::size_t>(std::ceil(spec.train_fraction * static_cast<double>(pool.size()) - 1e-12));
    if (k == 0) throw DataError("a class would receive zero training rows");
    train_idx.insert(train_idx.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    test_idx.insert(test_idx.end(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end());
  };

  if (spec.stratified) {
    for (int y : {-1, +1}) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < data.rows(); ++i)
        if (data.label(i) == y) pool.push_back(i);
      if (pool.empty()) throw DataError("stratified split needs both classes");
      take(std::move(pool));
    }
  } else {
    std::vector<std::size_t> pool(data.rows());
    std::iota(pool.begin(), pool.end(), 0);
    take(std::move(pool));
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  Split out;
  out.train = data.subset(train_idx, data.name() + "_train");
  if (!test_idx.empty()) out.test = data.subset(test_idx, data.name() + "_test");
  out.train_indices = std::move(train_idx);
  out.test_indices = std::move(test_idx);
  return out;
}

Dataset generate_synthetic(SyntheticKind kind, std::size_t n, double noise, std::uint64_t seed,
                           std::size_t dims) {
  if (n < 4) throw DataError("synthetic data needs n >= 4");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw DataError("noise must be a finite value >= 0");
  if (dims < 2) throw DataError("synthetic data needs at least 2 dimensions");
  Rng rng(derive_seed(seed, 0x5a17));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = (i % 2 == 0) ? -1 : 1;
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<double> feats(n * dims);
  for (std::size_t i = 0; i < n; ++i) {
    double* x = feats.data() + i * dims;
    const double y = labels[i];
    if (kind == SyntheticKind::kTwoGaussians) {
      for (std::size_t j = 0; j < dims; ++j)
        x[j] = y * 1.5 / std::sqrt(static_cast<double>(j + 1)) + noise * gauss(rng);
    } else {
      // Disk of radius 1 (class -1) inside a ring with radii [1.5, 2] (class +1).
      const double angle = 2.0 * M_PI * unif(rng);
      const double radius = y < 0 ? std::sqrt(unif(rng)) : 1.5 + 0.5 * unif(rng);
      x[0] = radius * std::cos(angle) + noise * gauss(rng);
      x[1] = radius * std::sin(angle) + noise * gauss(rng);
      for (std::size_t j = 2; j < dims; ++j) x[j] = gauss(rng);
    }
  }
  std::string name = kind == SyntheticKind::kTwoGaussians ? "two-gaussians" : "ring-vs-disk";
  return Dataset(name, n, dims, std::move(feats), std::move(labels));
}

Dataset subsample(const Dataset& data, std::size_t max_rows, std::uint64_t seed) {
  if (data.rows() <= max_rows) return data;
  SplitSpec spec{static_cast<double>(max_rows) / static_cast<double>(data.rows()), true, seed};
  auto split = stratified_split(data, spec);
  auto idx = split.train_indices;
  // Ceiling per class can overshoot by one row per class.
  if (idx.size() > max_rows) idx.resize(max_rows);
  return data.subset(idx, data.name());
}

SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "two-gaussians") return SyntheticKind::kTwoGaussians;
  if (s == "ring-vs-disk") return SyntheticKind::kRingVsDisk;
  throw ConfigError("unknown synthetic kind '" + s + "'");
}

}  // namespace margin_forge
