#include "margin_forge/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "margin_forge/error.hpp"

namespace margin_forge {

void TreeParams::validate() const {
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (max_leaves < 2) throw ConfigError("max_leaves must be >= 2");
  if (max_depth < 31 && max_leaves > (1 << max_depth)) throw ConfigError("max_leaves must not exceed 2^max_depth");
  if (!(min_leaf_weight > 0.0)) throw ConfigError("min_leaf_weight must be > 0");
}

Tree::Tree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree needs at least one node");
  for (const auto& nd : nodes_) {
    if (nd.is_leaf()) {
      if (nd.value != 1 && nd.value != -1) throw DataError("leaf prediction must be +/-1");
    } else {
      auto sz = static_cast<int>(nodes_.size());
      if (nd.left <= 0 || nd.right <= 0 || nd.left >= sz || nd.right >= sz)
        throw DataError("tree child index out of range");
    }
  }
}

Tree Tree::leaf(int value) {
  Node nd;
  nd.value = value >= 0 ? 1 : -1;
  return Tree({nd});
}

int Tree::predict(std::span<const double> x) const {
  if (x.size() < num_features()) throw DataError("feature vector too short for tree");
  return predict_unchecked(x.data());
}

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

int Tree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t Tree::num_features() const {
  std::size_t p = 0;
  for (const auto& n : nodes_)
    if (!n.is_leaf()) p = std::max(p, static_cast<std::size_t>(n.feature) + 1);
  return p;
}

namespace {

using nlohmann::json;

json node_to_json(const std::vector<Tree::Node>& nodes, int k) {
  const auto& nd = nodes[static_cast<std::size_t>(k)];
  if (nd.is_leaf()) return json{{"leaf", nd.value}};
  return json{{"feature", nd.feature},
              {"threshold", nd.threshold},
              {"left", node_to_json(nodes, nd.left)},
              {"right", node_to_json(nodes, nd.right)}};
}

int node_from_json(const json& j, int depth, std::vector<Tree::Node>& out) {
  const int k = static_cast<int>(out.size());
  out.emplace_back();
  out.back().depth = depth;
  if (j.contains("leaf")) {
    out.back().value = j.at("leaf").get<int>();
    return k;
  }
  const int feature = j.at("feature").get<int>();
  const double threshold = j.at("threshold").get<double>();
  if (feature < 0) throw DataError("tree json: negative feature index");
  int left = node_from_json(j.at("left"), depth + 1, out);
  int right = node_from_json(j.at("right"), depth + 1, out);
  auto& nd = out[static_cast<std::size_t>(k)];
  nd.feature = feature;
  nd.threshold = threshold;
  nd.left = left;
  nd.right = right;
  return k;
}

}  // namespace

namespace {
bool same_subtree(const std::vector<Tree::Node>& a, int i, const std::vector<Tree::Node>& b, int j) {
  const auto& x = a[static_cast<std::size_t>(i)];
  const auto& y = b[static_cast<std::size_t>(j)];
  if (x.is_leaf() || y.is_leaf()) return x.is_leaf() && y.is_leaf() && x.value == y.value;
  return x.feature == y.feature && x.threshold == y.threshold && same_subtree(a, x.left, b, y.left) &&
         same_subtree(a, x.right, b, y.right);
}
}  // namespace

bool Tree::operator==(const Tree& other) const { return same_subtree(nodes_, 0, other.nodes_, 0); }

std::string Tree::to_json() const { return node_to_json(nodes_, 0).dump(); }

Tree Tree::from_json(const std::string& text) {
  std::vector<Node> nodes;
  try {
    node_from_json(json::parse(text), 0, nodes);
  } catch (const json::exception& e) {
    throw DataError(std::string("tree json: ") + e.what());
  }
  return Tree(std::move(nodes));
}

SortedColumns::SortedColumns(const Dataset& data) : rows_(data.rows()), order_(data.rows() * data.cols()) {
  for (std::size_t j = 0; j < data.cols(); ++j) {
    auto* o = order_.data() + j * rows_;
    std::iota(o, o + rows_, 0u);
    std::stable_sort(o, o + rows_, [&](std::uint32_t a, std::uint32_t b) { return data.at(a, j) < data.at(b, j); });
  }
}

namespace {

// Weighted Gini impurity scaled by node weight: W * (1 - p+^2 - p-^2).
inline double impurity_mass(double pos, double neg) {
  const double w = pos + neg;
  return w > 0.0 ? 2.0 * pos * neg / w : 0.0;
}

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct Grower {
  const Dataset& data;
  std::span<const double> weights;
  const TreeParams& params;
  std::vector<std::size_t> features;
  const SortedColumns& sorted;
  std::vector<int> node_of_row;

  Candidate best_split(int node, double pos, double neg) const {
    // Impure nodes may split at zero gain (XOR has no improving first split).
    Candidate best;
    best.gain = -std::numeric_limits<double>::infinity();
    const double parent = impurity_mass(pos, neg);
    const double tol = 1e-12 * (pos + neg);
    if (parent <= tol) return {};
    for (std::size_t f : features) {
      double lpos = 0.0, lneg = 0.0;
      double prev = 0.0;
      bool have_prev = false;
      for (std::uint32_t r : sorted.order(f)) {
        if (node_of_row[r] != node) continue;
        const double v = data.at(r, f);
        if (have_prev && v > prev) {
          const double rpos = pos - lpos, rneg = neg - lneg;
          if (lpos + lneg >= params.min_leaf_weight && rpos + rneg >= params.min_leaf_weight) {
            const double gain = parent - impurity_mass(lpos, lneg) - impurity_mass(rpos, rneg);
            if (gain > best.gain + tol) {
              double mid = prev + (v - prev) / 2.0;
              if (!(mid < v)) mid = prev;
              best = {static_cast<int>(f), mid, gain};
            }
          }
        }
        (data.label(r) > 0 ? lpos : lneg) += weights[r];
        prev = v;
        have_prev = true;
      }
    }
    if (best.feature < 0) return {};
    best.gain = std::max(best.gain, 0.0);
    return best;
  }
};

}  // namespace

Tree fit_tree(const Dataset& data, std::span<const double> sample_weights, const TreeParams& params,
              std::optional<std::span<const std::size_t>> feature_subset, const SortedColumns* presorted) {
  params.validate();
  const std::size_t n = data.rows();
  if (sample_weights.size() != n) throw DataError("sample weight count does not match rows");
  double total = 0.0;
  for (double w : sample_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("sample weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw DataError("zero total sample weight");
  if (std::abs(total - 1.0) > 1e-9) throw DataError("sample weights must sum to 1");

  std::vector<std::size_t> features;
  if (feature_subset) {
    if (feature_subset->empty()) throw DataError("feature subset must be non-empty");
    features.assign(feature_subset->begin(), feature_subset->end());
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());
    if (features.back() >= data.cols()) throw DataError("feature subset index out of range");
  } else {
    features.resize(data.cols());
    std::iota(features.begin(), features.end(), std::size_t{0});
  }

  std::optional<SortedColumns> own_sort;
  if (!presorted) presorted = &own_sort.emplace(data);

  Grower g{data, sample_weights, params, std::move(features), *presorted, std::vector<int>(n, -1)};
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sample_weights[i] > 0.0) g.node_of_row[i] = 0;
    (data.label(i) > 0 ? pos : neg) += sample_weights[i];
  }

  struct LeafState {
    double pos, neg;
    Candidate split;
  };
  std::vector<Tree::Node> nodes(1);
  std::vector<LeafState> state;
  auto open = [&](int k, double p_, double n_) {
    auto& nd = nodes[static_cast<std::size_t>(k)];
    nd.value = p_ >= n_ ? 1 : -1;
    Candidate c;
    if (nd.depth < params.max_depth) c = g.best_split(k, p_, n_);
    if (state.size() <= static_cast<std::size_t>(k)) state.resize(static_cast<std::size_t>(k) + 1);
    state[static_cast<std::size_t>(k)] = {p_, n_, c};
  };
  open(0, pos, neg);

  std::size_t leaves = 1;
  while (leaves < static_cast<std::size_t>(params.max_leaves)) {
    int pick = -1;
    double best_gain = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (!nodes[k].is_leaf() || state[k].split.feature < 0) continue;
      const double tol = 1e-12;
      if (pick < 0 || state[k].split.gain > best_gain + tol) {
        pick = static_cast<int>(k);
        best_gain = state[k].split.gain;
      }
    }
    if (pick < 0) break;

    const Candidate c = state[static_cast<std::size_t>(pick)].split;
    const int left = static_cast<int>(nodes.size());
    const int right = left + 1;
    const int child_depth = nodes[static_cast<std::size_t>(pick)].depth + 1;
    nodes.resize(nodes.size() + 2);
    auto& parent = nodes[static_cast<std::size_t>(pick)];
    parent.feature = c.feature;
    parent.threshold = c.threshold;
    parent.left = left;
    parent.right = right;
    nodes[static_cast<std::size_t>(left)].depth = child_depth;
    nodes[static_cast<std::size_t>(right)].depth = child_depth;

    double lp = 0.0, ln = 0.0, rp = 0.0, rn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (g.node_of_row[i] != pick) continue;
      const bool go_left = data.at(i, static_cast<std::size_t>(c.feature)) <= c.threshold;
      g.node_of_row[i] = go_left ? left : right;
      double& acc = go_left ? (data.label(i) > 0 ? lp : ln) : (data.label(i) > 0 ? rp : rn);
      acc += sample_weights[i];
    }
    open(left, lp, ln);
    open(right, rp, rn);
    ++leaves;
  }
  return Tree(std::move(nodes));
}

double weighted_error(const Tree& tree, const Dataset& data, std::span<const double> weights) {
  if (weights.size() != data.rows()) throw DataError("weight count does not match rows");
  double err = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i)
    if (tree.predict(data.row(i)) != data.label(i)) err += weights[i];
  return err;
}

}  // namespace margin_forge
