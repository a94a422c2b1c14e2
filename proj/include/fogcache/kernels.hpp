#pragma once

// Data-parallel inner loops.
//
// Every kernel exists twice: `serial::` is the plain reference used by the
// tests, `parallel::` distributes independent output elements over OpenMP
// threads. Each output element is accumulated in the same order in both
// versions, so results are bitwise identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <span>

namespace fogcache::kernels {

/// Shape of a dense layer. Weights are stored input-major: w[i][o] at
/// i * out_dim + o.
struct DenseShape {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
};

namespace serial {

// out[b][o] = bias[o] + sum_i w[i][o] * in[b][i], summed over nonzero inputs
// in ascending i.
void dense_forward(DenseShape shape, std::span<const double> weights,
                   std::span<const double> bias, std::span<const double> in, std::size_t batch,
                   std::span<double> out);

// Accumulates grad_w[i][o] += sum_b in[b][i] * grad_out[b][o] and
// grad_b += sum_b grad_out[b], both in ascending b. When grad_in is non-empty
// it is overwritten with grad_in[b][i] = sum_o w[i][o] * grad_out[b][o].
void dense_backward(DenseShape shape, std::span<const double> weights,
                    std::span<const double> in, std::span<const double> grad_out,
                    std::size_t batch, std::span<double> grad_w, std::span<double> grad_b,
                    std::span<double> grad_in);

// Index of the nearest centroid for every point, ties to the lower index.
// Brute force over all centroids; centroids need not be sorted.
void assign_nearest(std::span<const double> points, std::span<const double> centroids,
                    std::span<std::uint32_t> indices);

}  // namespace serial

namespace parallel {

void dense_forward(DenseShape shape, std::span<const double> weights,
                   std::span<const double> bias, std::span<const double> in, std::size_t batch,
                   std::span<double> out);

void dense_backward(DenseShape shape, std::span<const double> weights,
                    std::span<const double> in, std::span<const double> grad_out,
                    std::size_t batch, std::span<double> grad_w, std::span<double> grad_b,
                    std::span<double> grad_in);

// Same contract as serial::assign_nearest but requires ascending centroids;
// uses a binary search plus neighbour check, O(n log k).
void assign_nearest(std::span<const double> points, std::span<const double> sorted_centroids,
                    std::span<std::uint32_t> indices);

}  // namespace parallel

/// Nearest entry of an ascending centroid array, ties to the lower index.
std::uint32_t nearest_sorted(std::span<const double> sorted_centroids, double x);

}  // namespace fogcache::kernels
