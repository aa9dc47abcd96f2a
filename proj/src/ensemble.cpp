#include "margin_forge/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "margin_forge/error.hpp"
#include "margin_forge/kernels.hpp"
#include "margin_forge/rng.hpp"

namespace margin_forge {

std::string to_string(Method m) {
  switch (m) {
    case Method::kAdaBoost: return "adaboost";
    case Method::kRandomForest: return "random-forest";
    case Method::kBagging: return "bagging";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "adaboost" || s == "ab") return Method::kAdaBoost;
  if (s == "random-forest" || s == "rf") return Method::kRandomForest;
  if (s == "bagging") return Method::kBagging;
  throw ConfigError("unknown ensemble method '" + s + "'");
}

std::vector<double> normalize_weights(std::span<const double> w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  if (!std::isfinite(s) || std::abs(s) <= 1e-9) throw NumericalError("non-normalizable weight vector (sum " + std::to_string(s) + ")");
  std::vector<double> out(w.begin(), w.end());
  for (double& v : out) v /= s;
  return out;
}

EnsembleModel adaboost(const Dataset& train, std::size_t rounds, const TreeParams& params, AdaBoostTrace* trace) {
  train.require_both_classes();
  if (rounds == 0) throw ConfigError("adaboost needs at least one round");
  params.validate();
  const std::size_t n = train.rows();
  const SortedColumns sorted(train);

  EnsembleModel model;
  model.method = Method::kAdaBoost;
  model.tree_params = params;
  model.rounds_requested = rounds;

  std::vector<double> dist(n, 1.0 / static_cast<double>(n));
  if (trace) {
    trace->epsilon.clear();
    trace->distributions.assign(1, dist);
  }

  for (std::size_t t = 0; t < rounds; ++t) {
    Tree h = fit_tree(train, dist, params, std::nullopt, &sorted);
    std::vector<int> pred(n);
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = h.predict_unchecked(train.row(i).data());
      if (pred[i] != train.label(i)) eps += dist[i];
    }
    if (trace) trace->epsilon.push_back(eps);

    if (eps == 0.0) {
      model.stop_reason = "epsilon = 0 at round " + std::to_string(t + 1);
      if (model.learners.empty()) {
        model.learners.push_back(std::move(h));
        model.raw_weights.push_back(1.0);
      }
      break;
    }
    // A learner that merely repeats the previous round sits at 1/2 up to rounding.
    if (eps >= 0.5 - 1e-12) {
      model.stop_reason = "epsilon >= 1/2 at round " + std::to_string(t + 1);
      break;
    }

    const double alpha = 0.5 * std::log((1.0 - eps) / eps);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] *= std::exp(-alpha * train.label(i) * pred[i]);
      z += dist[i];
    }
    for (double& d : dist) d /= z;
    if (trace) trace->distributions.push_back(dist);

    model.learners.push_back(std::move(h));
    model.raw_weights.push_back(alpha);
  }
  if (model.learners.empty()) throw DataError("adaboost produced no usable learner: " + model.stop_reason);
  model.weights = normalize_weights(model.raw_weights);
  return model;
}

EnsembleModel random_forest(const Dataset& train, std::size_t trees, const TreeParams& params, std::uint64_t seed,
                            const ForestOptions& options) {
  train.require_both_classes();
  if (trees == 0) throw ConfigError("ensemble needs at least one tree");
  params.validate();
  const std::size_t n = train.rows();
  const std::size_t p = train.cols();
  std::size_t m_try = options.m_try ? options.m_try : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
  if (m_try < 1 || m_try > p) throw ConfigError("m_try must lie in [1, p]");

  const SortedColumns sorted(train);
  std::vector<std::optional<Tree>> grown(trees);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(trees); ++ti) {
    try {
      const auto t = static_cast<std::size_t>(ti);
      Rng rng(derive_seed(seed, t));
      std::vector<double> w(n, 0.0);
      if (options.bootstrap) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t k = 0; k < n; ++k) w[pick(rng)] += 1.0;
        for (double& v : w) v /= static_cast<double>(n);
      } else {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
      }
      std::vector<std::size_t> features(p);
      std::iota(features.begin(), features.end(), std::size_t{0});
      for (std::size_t k = 0; k < m_try; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, p - 1);
        std::swap(features[k], features[pick(rng)]);
      }
      features.resize(m_try);
      grown[t] = fit_tree(train, w, params, std::span<const std::size_t>(features), &sorted);
    } catch (...) {
#pragma omp critical(margin_forge_rf_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleModel model;
  model.method = Method::kRandomForest;
  model.tree_params = params;
  model.seed = seed;
  model.m_try = m_try;
  model.rounds_requested = trees;
  for (auto& t : grown) model.learners.push_back(std::move(*t));
  model.raw_weights.assign(trees, 1.0);
  model.weights.assign(trees, 1.0 / static_cast<double>(trees));
  return model;
}

EnsembleModel bagging(const Dataset& train, std::size_t trees, const TreeParams& params, std::uint64_t seed) {
  auto model = random_forest(train, trees, params, seed, ForestOptions{train.cols(), true});
  model.method = Method::kBagging;
  return model;
}

EnsembleModel train_ensemble(Method method, const Dataset& train, std::size_t trees, const TreeParams& params,
                             std::uint64_t seed, std::size_t m_try) {
  switch (method) {
    case Method::kAdaBoost: return adaboost(train, trees, params);
    case Method::kBagging: return bagging(train, trees, params, seed);
    case Method::kRandomForest: return random_forest(train, trees, params, seed, ForestOptions{m_try, true});
  }
  throw ConfigError("unknown method");
}

PredictionMatrix::PredictionMatrix(std::size_t rows, std::size_t cols, std::vector<std::int8_t> entries,
                                   std::vector<int> labels)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), labels_(std::move(labels)) {
  if (entries_.size() != rows_ * cols_) throw DataError("prediction matrix size mismatch");
  if (labels_.size() != rows_) throw DataError("prediction matrix label count mismatch");
  for (auto e : entries_)
    if (e != 1 && e != -1) throw DataError("prediction matrix entries must be +/-1");
}

PredictionMatrix prediction_matrix(std::span<const Tree> learners, const Dataset& data) {
  std::vector<std::int8_t> entries(data.rows() * learners.size());
  kernels::parallel::predict_all(learners, data, entries);
  return PredictionMatrix(data.rows(), learners.size(), std::move(entries),
                          std::vector<int>(data.labels().begin(), data.labels().end()));
}

PredictionMatrix prediction_matrix(const EnsembleModel& model, const Dataset& data) {
  return prediction_matrix(std::span<const Tree>(model.learners), data);
}

int predict(const EnsembleModel& model, std::span<const double> x) {
  if (model.weights.size() != model.learners.size()) throw DataError("model weights do not match learners");
  double s = 0.0;
  for (std::size_t t = 0; t < model.learners.size(); ++t) s += model.weights[t] * model.learners[t].predict(x);
  return s >= 0.0 ? 1 : -1;
}

double test_error(const PredictionMatrix& H, std::span<const double> weights) {
  std::vector<double> votes(H.rows());
  kernels::parallel::weighted_votes(H.entries(), H.cols(), {}, weights, votes);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < H.rows(); ++i)
    if ((votes[i] >= 0.0 ? 1 : -1) != H.label(i)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(H.rows());
}

double test_error(const EnsembleModel& model, const Dataset& data) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.rows(); ++i)
    if (predict(model, data.row(i)) != data.label(i)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(data.rows());
}

std::uint64_t learner_hash(std::span<const Tree> learners) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : learners) {
    for (unsigned char c : t.to_json() + ";") {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string model_to_json(const EnsembleModel& model) {
  using nlohmann::json;
  json j;
  j["method"] = to_string(model.method);
  j["seed"] = model.seed;
  j["m_try"] = model.m_try;
  j["rounds_requested"] = model.rounds_requested;
  j["stop_reason"] = model.stop_reason;
  j["tree_params"] = {{"max_depth", model.tree_params.max_depth},
                      {"max_leaves", model.tree_params.max_leaves},
                      {"min_leaf_weight", model.tree_params.min_leaf_weight}};
  j["raw_weights"] = model.raw_weights;
  j["weights"] = model.weights;
  json learners = json::array();
  for (const auto& t : model.learners) learners.push_back(json::parse(t.to_json()));
  j["learners"] = std::move(learners);
  return j.dump();
}

EnsembleModel model_from_json(const std::string& text) {
  using nlohmann::json;
  EnsembleModel m;
  try {
    auto j = json::parse(text);
    m.method = method_from_string(j.at("method").get<std::string>());
    m.seed = j.value("seed", std::uint64_t{0});
    m.m_try = j.value("m_try", std::size_t{0});
    m.rounds_requested = j.value("rounds_requested", std::size_t{0});
    m.stop_reason = j.value("stop_reason", std::string{});
    const auto& tp = j.at("tree_params");
    m.tree_params.max_depth = tp.at("max_depth").get<int>();
    m.tree_params.max_leaves = tp.at("max_leaves").get<int>();
    m.tree_params.min_leaf_weight = tp.at("min_leaf_weight").get<double>();
    m.raw_weights = j.at("raw_weights").get<std::vector<double>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& t : j.at("learners")) m.learners.push_back(Tree::from_json(t.dump()));
  } catch (const json::exception& e) {
    throw DataError(std::string("model snapshot: ") + e.what());
  }
  if (m.learners.empty() || m.weights.size() != m.learners.size() || m.raw_weights.size() != m.learners.size())
    throw DataError("model snapshot: learner and weight counts disagree");
  return m;
}

void save_model(const EnsembleModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

EnsembleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace margin_forge
