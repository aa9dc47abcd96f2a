#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "margin_forge/cart.hpp"
#include "margin_forge/dataset.hpp"

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP variant in kernels::parallel with identical
// results; tests compare the two and bench/ times them.
namespace margin_forge::kernels {

namespace serial {

/// out[i*T + t] = trees[t](x_i), row-major n x T.
void predict_all(std::span<const Tree> trees, const Dataset& data, std::span<std::int8_t> out);

/// out[i] = y_i * sum_t w_t H[i*T + t]; labels may be empty (treated as +1).
void weighted_votes(std::span<const std::int8_t> H, std::size_t T, std::span<const int> labels,
                    std::span<const double> w, std::span<double> out);

/// Gauss-Jordan pivot on a dense row-major tableau (rows x cols) at (pr, pc).
void pivot(std::span<double> tableau, std::size_t rows, std::size_t cols, std::size_t pr, std::size_t pc);

}  // namespace serial

namespace parallel {

void predict_all(std::span<const Tree> trees, const Dataset& data, std::span<std::int8_t> out);
void weighted_votes(std::span<const std::int8_t> H, std::size_t T, std::span<const int> labels,
                    std::span<const double> w, std::span<double> out);
void pivot(std::span<double> tableau, std::size_t rows, std::size_t cols, std::size_t pr, std::size_t pc);

}  // namespace parallel

}  // namespace margin_forge::kernels
