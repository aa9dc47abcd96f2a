#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "margin_forge/dataset.hpp"

namespace margin_forge {

struct TreeParams {
  int max_depth = 2;
  int max_leaves = 4;
  double min_leaf_weight = 1e-12;

  /// Throws ConfigError when max_leaves > 2^max_depth or a field is out of range.
  void validate() const;
};

/// Depth- and leaf-limited binary classification tree with +/-1 leaves.
///
/// Nodes are stored flat; index 0 is the root. An input goes left iff
/// x[feature] <= threshold.
class Tree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int value = 1;  // leaf prediction
    int depth = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  Tree() : nodes_{Node{}} {}
  explicit Tree(std::vector<Node> nodes);

  static Tree leaf(int value);

  int predict(std::span<const double> x) const;
  /// Skips the dimension check; x must have at least num_features() entries.
  int predict_unchecked(const double* x) const {
    int k = 0;
    while (nodes_[k].feature >= 0) k = x[nodes_[k].feature] <= nodes_[k].threshold ? nodes_[k].left : nodes_[k].right;
    return nodes_[k].value;
  }

  std::size_t num_leaves() const;
  int depth() const;
  /// One past the largest feature index used (0 for a single leaf).
  std::size_t num_features() const;
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Nested text form: {"feature":f,"threshold":t,"left":{...},"right":{...}} or {"leaf":v}.
  std::string to_json() const;
  static Tree from_json(const std::string& text);

  /// Structural: same splits and leaf values, whatever the node numbering.
  bool operator==(const Tree& other) const;

 private:
  std::vector<Node> nodes_;
};

/// Per-feature row orderings by ascending value, reusable across many fits on
/// the same data (AdaBoost rounds, forest members).
class SortedColumns {
 public:
  explicit SortedColumns(const Dataset& data);
  std::span<const std::uint32_t> order(std::size_t feature) const {
    return {order_.data() + feature * rows_, rows_};
  }

 private:
  std::size_t rows_;
  std::vector<std::uint32_t> order_;
};

/// Weighted CART fit. Splits maximize the weighted Gini decrease over midpoints
/// of consecutive distinct values (rows with zero weight are ignored); growth is
/// best-first over leaves until max_leaves is reached or nothing improves.
/// Ties go to the lowest feature index, then the lowest threshold.
Tree fit_tree(const Dataset& data, std::span<const double> sample_weights, const TreeParams& params,
              std::optional<std::span<const std::size_t>> feature_subset = std::nullopt,
              const SortedColumns* presorted = nullptr);

/// Weighted misclassification rate of the tree on data.
double weighted_error(const Tree& tree, const Dataset& data, std::span<const double> weights);

}  // namespace margin_forge
