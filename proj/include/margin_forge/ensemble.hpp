#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "margin_forge/cart.hpp"
#include "margin_forge/dataset.hpp"

namespace margin_forge {

enum class Method { kAdaBoost, kRandomForest, kBagging };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Trained voting ensemble. `weights` are the normalized vote weights used for
/// margins (nonnegative, summing to 1); `raw_weights` keeps AdaBoost's alpha_t.
struct EnsembleModel {
  Method method = Method::kAdaBoost;
  std::vector<Tree> learners;
  std::vector<double> raw_weights;
  std::vector<double> weights;
  TreeParams tree_params;
  std::uint64_t seed = 0;
  std::size_t m_try = 0;
  std::size_t rounds_requested = 0;
  /// Why boosting stopped early ("" when all rounds ran).
  std::string stop_reason;

  std::size_t size() const { return learners.size(); }
};

/// Per-round record of an AdaBoost run: epsilon_t and the distributions
/// D^(t) (index t) and D^(t+1) (index t+1) around each round.
struct AdaBoostTrace {
  std::vector<double> epsilon;
  std::vector<std::vector<double>> distributions;
};

/// Discrete AdaBoost. Stops early when epsilon_t == 0 or epsilon_t >= 1/2 and
/// returns the learners accumulated so far; a perfect first learner is kept as
/// a one-tree ensemble. Throws DataError when no learner is usable.
EnsembleModel adaboost(const Dataset& train, std::size_t rounds, const TreeParams& params,
                       AdaBoostTrace* trace = nullptr);

struct ForestOptions {
  /// Features drawn per tree; 0 means ceil(sqrt(p)).
  std::size_t m_try = 0;
  /// Debug switch: false fits every tree on the full sample.
  bool bootstrap = true;
};

/// Random forest: per tree a size-n bootstrap (as count weights) and one
/// uniform feature subset of size m_try. Trees are trained in parallel from
/// per-tree streams derived from (seed, t), so results do not depend on the
/// thread count. Vote weights are uniform.
EnsembleModel random_forest(const Dataset& train, std::size_t trees, const TreeParams& params, std::uint64_t seed,
                            const ForestOptions& options = {});

/// Bagging: random_forest with m_try = p.
EnsembleModel bagging(const Dataset& train, std::size_t trees, const TreeParams& params, std::uint64_t seed);

EnsembleModel train_ensemble(Method method, const Dataset& train, std::size_t trees, const TreeParams& params,
                             std::uint64_t seed, std::size_t m_try = 0);

/// n x T matrix of +/-1 weak-learner predictions with the row labels.
class PredictionMatrix {
 public:
  PredictionMatrix() = default;
  PredictionMatrix(std::size_t rows, std::size_t cols, std::vector<std::int8_t> entries, std::vector<int> labels);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int at(std::size_t i, std::size_t t) const { return entries_[i * cols_ + t]; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const std::int8_t> entries() const { return entries_; }
  std::span<const int> labels() const { return labels_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int8_t> entries_;
  std::vector<int> labels_;
};

PredictionMatrix prediction_matrix(const EnsembleModel& model, const Dataset& data);
PredictionMatrix prediction_matrix(std::span<const Tree> learners, const Dataset& data);

/// sign(sum_t w_t h_t(x)) with sign(0) = +1, using the normalized weights.
int predict(const EnsembleModel& model, std::span<const double> x);

double test_error(const EnsembleModel& model, const Dataset& data);
/// Error of an arbitrary weight vector over precomputed predictions.
double test_error(const PredictionMatrix& H, std::span<const double> weights);

/// Normalizes to sum 1; throws NumericalError when the sum is (near) zero.
std::vector<double> normalize_weights(std::span<const double> w);

/// FNV-1a over the serialized learners; equal hashes mean identical trees.
std::uint64_t learner_hash(std::span<const Tree> learners);

void save_model(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_model(const std::filesystem::path& path);
std::string model_to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const std::string& text);

}  // namespace margin_forge
