#include "fogcache/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fogcache::kernels {

namespace {

// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWork = std::size_t{1} << 15;

// Nonzero positions of every input row, ascending. Every output element sums
// over these in ascending order in all kernels below.
struct SparseRows {
  std::vector<std::uint32_t> idx;
  std::vector<std::size_t> start;

  SparseRows(std::span<const double> in, std::size_t batch, std::size_t dim) : start(batch + 1, 0) {
    idx.reserve(in.size() / 2);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* x = in.data() + b * dim;
      for (std::size_t i = 0; i < dim; ++i) {
        if (x[i] != 0.0) idx.push_back(static_cast<std::uint32_t>(i));
      }
      start[b + 1] = idx.size();
    }
  }
};

inline void axpy(double* y, const double* x, std::size_t n, double a) {
  for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

inline double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void forward_row(DenseShape shape, const double* w, const double* bias, const double* x,
                 const SparseRows& rows, std::size_t b, double* out) {
  std::copy(bias, bias + shape.out_dim, out);
  for (std::size_t k = rows.start[b]; k < rows.start[b + 1]; ++k) {
    const auto i = rows.idx[k];
    axpy(out, w + i * shape.out_dim, shape.out_dim, x[i]);
  }
}

void grad_in_row(DenseShape shape, const double* w, const double* g, double* gi) {
  for (std::size_t i = 0; i < shape.in_dim; ++i) gi[i] = dot(w + i * shape.out_dim, g, shape.out_dim);
}

}  // namespace

namespace serial {

void dense_forward(DenseShape shape, std::span<const double> weights,
                   std::span<const double> bias, std::span<const double> in, std::size_t batch,
                   std::span<double> out) {
  const SparseRows rows(in, batch, shape.in_dim);
  for (std::size_t b = 0; b < batch; ++b) {
    forward_row(shape, weights.data(), bias.data(), in.data() + b * shape.in_dim, rows, b,
                out.data() + b * shape.out_dim);
  }
}

void dense_backward(DenseShape shape, std::span<const double> weights,
                    std::span<const double> in, std::span<const double> grad_out,
                    std::size_t batch, std::span<double> grad_w, std::span<double> grad_b,
                    std::span<double> grad_in) {
  const auto [in_dim, out_dim] = shape;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* g = grad_out.data() + b * out_dim;
    const double* x = in.data() + b * in_dim;
    for (std::size_t o = 0; o < out_dim; ++o) grad_b[o] += g[o];
    for (std::size_t i = 0; i < in_dim; ++i) {
      if (x[i] != 0.0) axpy(grad_w.data() + i * out_dim, g, out_dim, x[i]);
    }
  }
  if (grad_in.empty()) return;
  for (std::size_t b = 0; b < batch; ++b) {
    grad_in_row(shape, weights.data(), grad_out.data() + b * out_dim, grad_in.data() + b * in_dim);
  }
}

void assign_nearest(std::span<const double> points, std::span<const double> centroids,
                    std::span<std::uint32_t> indices) {
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::uint32_t best = 0;
    double best_dist = std::abs(points[p] - centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = std::abs(points[p] - centroids[c]);
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<std::uint32_t>(c);
      }
    }
    indices[p] = best;
  }
}

}  // namespace serial

namespace parallel {

void dense_forward(DenseShape shape, std::span<const double> weights,
                   std::span<const double> bias, std::span<const double> in, std::size_t batch,
                   std::span<double> out) {
  const SparseRows rows(in, batch, shape.in_dim);
  const bool wide = rows.idx.size() * shape.out_dim >= kParallelWork;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t sb = 0; sb < static_cast<std::int64_t>(batch); ++sb) {
    const auto b = static_cast<std::size_t>(sb);
    forward_row(shape, weights.data(), bias.data(), in.data() + b * shape.in_dim, rows, b,
                out.data() + b * shape.out_dim);
  }
}

void dense_backward(DenseShape shape, std::span<const double> weights,
                    std::span<const double> in, std::span<const double> grad_out,
                    std::size_t batch, std::span<double> grad_w, std::span<double> grad_b,
                    std::span<double> grad_in) {
  const auto [in_dim, out_dim] = shape;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_dim; ++o) grad_b[o] += grad_out[b * out_dim + o];
  }
  const bool wide = batch * out_dim * in_dim >= kParallelWork;
  // Each weight row i is owned by one thread and accumulates over b in order.
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t si = 0; si < static_cast<std::int64_t>(in_dim); ++si) {
    const auto i = static_cast<std::size_t>(si);
    double* gw = grad_w.data() + i * out_dim;
    for (std::size_t b = 0; b < batch; ++b) {
      const double xi = in[b * in_dim + i];
      if (xi != 0.0) axpy(gw, grad_out.data() + b * out_dim, out_dim, xi);
    }
  }
  if (grad_in.empty()) return;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t sb = 0; sb < static_cast<std::int64_t>(batch); ++sb) {
    const auto b = static_cast<std::size_t>(sb);
    grad_in_row(shape, weights.data(), grad_out.data() + b * out_dim, grad_in.data() + b * in_dim);
  }
}

void assign_nearest(std::span<const double> points, std::span<const double> sorted_centroids,
                    std::span<std::uint32_t> indices) {
  const auto n = static_cast<std::int64_t>(points.size());
  const bool wide = points.size() * 8 >= kParallelWork;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t p = 0; p < n; ++p) {
    indices[static_cast<std::size_t>(p)] =
        nearest_sorted(sorted_centroids, points[static_cast<std::size_t>(p)]);
  }
}

}  // namespace parallel

std::uint32_t nearest_sorted(std::span<const double> c, double x) {
  // First centroid strictly greater than x; the nearest is it or its predecessor.
  const auto hi = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), x) - c.begin());
  std::size_t best = hi == 0 ? 0 : hi - 1;
  if (hi < c.size() && std::abs(x - c[hi]) < std::abs(x - c[best])) best = hi;
  // Duplicate centroids: the brute-force rule picks the lowest index.
  while (best > 0 && std::abs(x - c[best - 1]) <= std::abs(x - c[best])) --best;
  return static_cast<std::uint32_t>(best);
}

}  // namespace fogcache::kernels
