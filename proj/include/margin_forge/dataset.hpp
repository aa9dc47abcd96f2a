#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace margin_forge {

/// Binary classification sample: row-major n x p features, labels in {-1,+1}.
///
/// Instances are immutable once built; every constructor path goes through
/// validate(), so downstream code may rely on finite features and +/-1 labels.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, std::size_t rows, std::size_t cols, std::vector<double> features,
          std::vector<int> labels, std::vector<std::string> feature_names = {});

  const std::string& name() const { return name_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const { return {features_.data() + i * cols_, cols_}; }
  double at(std::size_t i, std::size_t j) const { return features_[i * cols_ + j]; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const { return labels_; }
  std::span<const double> features() const { return features_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  std::size_t count_label(int y) const;
  bool has_both_classes() const { return count_label(-1) > 0 && count_label(+1) > 0; }

  /// Rows selected by index, in the given order (duplicates allowed).
  Dataset subset(std::span<const std::size_t> indices, std::string name = {}) const;

  /// Throws DataError unless both classes are present.
  void require_both_classes() const;

 private:
  void validate() const;

  std::string name_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
  std::vector<std::string> feature_names_;
};

/// kAuto picks the sparse reader for .svm / .libsvm / .sparse files.
enum class FileFormat { kAuto, kDelimited, kSparseIndex };

struct LoadOptions {
  FileFormat format = FileFormat::kAuto;
  /// Delimiter for delimited files; 0 means auto-detect (tab if present, else comma).
  char delimiter = 0;
  /// nullopt: header presence is detected from the first row.
  std::optional<bool> header;
  /// Label column for delimited files; negative values count from the end (-1 = last).
  int label_column = -1;
  /// Feature count for sparse files; 0 infers it from the largest index seen.
  std::size_t sparse_dim = 0;
};

/// Smaller raw label maps to -1, larger to +1 (numeric comparison when both
/// parse as numbers, lexicographic otherwise).
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

FileFormat format_from_path(const std::filesystem::path& path);

/// Labels written as -1/+1 in the last column with a header row.
void write_delimited(const Dataset& data, const std::filesystem::path& path, char delimiter = ',');

struct SplitSpec {
  double train_fraction = 0.7;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Per class, ceil(fraction * class size) rows go to train. Indices inside each
/// side are returned in ascending order.
Split stratified_split(const Dataset& data, const SplitSpec& spec);

enum class SyntheticKind { kTwoGaussians, kRingVsDisk };

/// Balanced classes (sizes differ by at most one). Two-gaussians with noise 0 is
/// linearly separable along the first feature; noise widens the clusters.
Dataset generate_synthetic(SyntheticKind kind, std::size_t n, double noise, std::uint64_t seed,
                           std::size_t dims = 2);

/// Stratified random subsample down to max_rows (returns data unchanged if smaller).
Dataset subsample(const Dataset& data, std::size_t max_rows, std::uint64_t seed);

SyntheticKind synthetic_kind_from_string(const std::string& s);

}  // namespace margin_forge
