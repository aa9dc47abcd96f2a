#include "margin_forge/kernels.hpp"

#include <omp.h>

#include "margin_forge/error.hpp"

namespace margin_forge::kernels {

namespace {

void check_predict(std::span<const Tree> trees, const Dataset& data, std::span<std::int8_t> out) {
  if (out.size() != data.rows() * trees.size()) throw DataError("prediction buffer has wrong size");
  for (const auto& t : trees)
    if (t.num_features() > data.cols()) throw DataError("tree uses more features than the data has");
}

void check_votes(std::span<const std::int8_t> H, std::size_t T, std::span<const int> labels,
                 std::span<const double> w, std::span<double> out) {
  if (w.size() != T) throw DataError("weight vector length does not match T");
  if (H.size() != out.size() * T) throw DataError("prediction matrix does not match output size");
  if (!labels.empty() && labels.size() != out.size()) throw DataError("label count does not match rows");
}

inline double row_vote(const std::int8_t* h, const double* w, std::size_t T) {
  double s = 0.0;
  for (std::size_t t = 0; t < T; ++t) s += w[t] * h[t];
  return s;
}

inline void eliminate_row(double* row, const double* prow, std::size_t cols, std::size_t pc) {
  const double f = row[pc];
  if (f == 0.0) return;
  for (std::size_t j = 0; j < cols; ++j) row[j] -= f * prow[j];
  row[pc] = 0.0;
}

void scale_pivot_row(double* prow, std::size_t cols, std::size_t pc) {
  const double inv = 1.0 / prow[pc];
  for (std::size_t j = 0; j < cols; ++j) prow[j] *= inv;
  prow[pc] = 1.0;
}

}  // namespace

namespace serial {

void predict_all(std::span<const Tree> trees, const Dataset& data, std::span<std::int8_t> out) {
  check_predict(trees, data, out);
  const std::size_t T = trees.size();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double* x = data.row(i).data();
    for (std::size_t t = 0; t < T; ++t) out[i * T + t] = static_cast<std::int8_t>(trees[t].predict_unchecked(x));
  }
}

void weighted_votes(std::span<const std::int8_t> H, std::size_t T, std::span<const int> labels,
                    std::span<const double> w, std::span<double> out) {
  check_votes(H, T, labels, w, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double y = labels.empty() ? 1.0 : labels[i];
    out[i] = y * row_vote(H.data() + i * T, w.data(), T);
  }
}

void pivot(std::span<double> tableau, std::size_t rows, std::size_t cols, std::size_t pr, std::size_t pc) {
  double* base = tableau.data();
  double* prow = base + pr * cols;
  scale_pivot_row(prow, cols, pc);
  for (std::size_t r = 0; r < rows; ++r)
    if (r != pr) eliminate_row(base + r * cols, prow, cols, pc);
}

}  // namespace serial

namespace parallel {

void predict_all(std::span<const Tree> trees, const Dataset& data, std::span<std::int8_t> out) {
  check_predict(trees, data, out);
  const std::size_t T = trees.size();
  const auto n = static_cast<std::ptrdiff_t>(data.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double* x = data.row(ui).data();
    for (std::size_t t = 0; t < T; ++t) out[ui * T + t] = static_cast<std::int8_t>(trees[t].predict_unchecked(x));
  }
}

void weighted_votes(std::span<const std::int8_t> H, std::size_t T, std::span<const int> labels,
                    std::span<const double> w, std::span<double> out) {
  check_votes(H, T, labels, w, out);
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double y = labels.empty() ? 1.0 : labels[ui];
    out[ui] = y * row_vote(H.data() + ui * T, w.data(), T);
  }
}

void pivot(std::span<double> tableau, std::size_t rows, std::size_t cols, std::size_t pr, std::size_t pc) {
  double* base = tableau.data();
  double* prow = base + pr * cols;
  scale_pivot_row(prow, cols, pc);
  const auto nr = static_cast<std::ptrdiff_t>(rows);
  // Small tableaus are not worth a fork/join.
#pragma omp parallel for schedule(static) if (rows * cols > 1u << 16)
  for (std::ptrdiff_t r = 0; r < nr; ++r)
    if (static_cast<std::size_t>(r) != pr) eliminate_row(base + static_cast<std::size_t>(r) * cols, prow, cols, pc);
}

}  // namespace parallel

}  // namespace margin_forge::kernels
