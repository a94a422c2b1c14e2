#include "fogcache/fedcompress/quantize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fogcache/kernels.hpp"

namespace fogcache::fedcompress {

std::uint32_t bits_for(std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("codebook needs at least one centroid");
  return k == 1 ? 0U : static_cast<std::uint32_t>(std::bit_width(k - 1));
}

std::uint32_t Codebook::index_bits() const { return bits_for(k()); }

std::uint64_t Codebook::payload_bits() const {
  return static_cast<std::uint64_t>(n()) * index_bits() +
         static_cast<std::uint64_t>(k()) * bit_width;
}

std::vector<double> Codebook::decode() const {
  std::vector<double> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= centroids.size()) throw std::out_of_range("codebook index out of range");
    out[i] = centroids[indices[i]];
  }
  return out;
}

double Codebook::sse(std::span<const double> data) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = data[i] - centroids.at(indices.at(i));
    acc += d * d;
  }
  return acc;
}

namespace {

void check_args(std::span<const double> data, std::size_t k) {
  if (data.empty()) throw std::invalid_argument("k-means: empty data");
  if (k == 0) throw std::invalid_argument("k-means: k must be positive");
  if (k > data.size()) throw std::invalid_argument("k-means: k exceeds the number of points");
}

std::vector<double> linear_init(double lo, double hi, std::size_t k) {
  std::vector<double> c(k);
  if (k == 1) {
    c[0] = lo + 0.5 * (hi - lo);
    return c;
  }
  for (std::size_t j = 0; j < k; ++j) {
    c[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(k - 1);
  }
  c[k - 1] = hi;
  return c;
}

// Codebook over the distinct values when there are no more than k of them.
bool exact_codebook(std::vector<double> sorted, std::size_t k, std::vector<double>& centroids) {
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() > k) return false;
  centroids = sorted;
  centroids.resize(k, sorted.back());
  return true;
}

// Re-seeds every empty cluster at the point farthest from its current
// centroid (ties to the lower original index). Returns false when no point
// has a positive distance, leaving the cluster where it is.
bool reseed_empty(std::span<const double> data, std::span<const std::uint32_t> idx,
                  std::vector<double>& centroids, const std::vector<std::size_t>& counts) {
  std::vector<double> dist(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) dist[i] = std::abs(data[i] - centroids[idx[i]]);
  bool moved = false;
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    if (counts[j] != 0) continue;
    const auto it = std::max_element(dist.begin(), dist.end());
    if (!(*it > 0.0)) break;
    const auto i = static_cast<std::size_t>(it - dist.begin());
    centroids[j] = data[i];
    dist[i] = 0.0;
    moved = true;
  }
  return moved;
}

}  // namespace

Codebook kmeans_quantize(std::span<const double> data, std::size_t k, const KmeansOptions& options) {
  check_args(data, k);
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data[a] < data[b]; });
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = data[order[i]];

  Codebook cb;
  cb.bit_width = options.bit_width;
  cb.indices.assign(n, 0);

  if (!exact_codebook(xs, k, cb.centroids)) {
    auto& c = cb.centroids;
    c = linear_init(xs.front(), xs.back(), k);
    // Cluster j owns the sorted range [start[j], start[j + 1]).
    std::vector<std::size_t> start(k + 1, 0), prev;
    std::vector<std::uint32_t> sorted_idx(n);
    bool reseeded = false;
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
      start[0] = 0;
      for (std::size_t j = 1; j < k; ++j) {
        const auto it = std::partition_point(xs.begin() + static_cast<std::ptrdiff_t>(start[j - 1]), xs.end(),
                                             [&](double x) { return kernels::nearest_sorted(c, x) < j; });
        start[j] = static_cast<std::size_t>(it - xs.begin());
      }
      start[k] = n;
      if (start == prev && !reseeded) break;
      prev = start;

      std::vector<std::size_t> counts(k);
      for (std::size_t j = 0; j < k; ++j) {
        counts[j] = start[j + 1] - start[j];
        if (counts[j] == 0) continue;
        double sum = 0.0;
        for (std::size_t i = start[j]; i < start[j + 1]; ++i) sum += xs[i];
        c[j] = sum / static_cast<double>(counts[j]);
      }
      reseeded = false;
      if (std::find(counts.begin(), counts.end(), 0U) != counts.end()) {
        // Reseeding works on original order so ties match the reference.
        for (std::size_t j = 0; j < k; ++j) {
          for (std::size_t i = start[j]; i < start[j + 1]; ++i) sorted_idx[order[i]] = static_cast<std::uint32_t>(j);
        }
        reseeded = reseed_empty(data, sorted_idx, c, counts);
        std::sort(c.begin(), c.end());
      }
    }
  }
  kernels::parallel::assign_nearest(data, cb.centroids, cb.indices);
  return cb;
}

Codebook kmeans_quantize_reference(std::span<const double> data, std::size_t k,
                                   const KmeansOptions& options) {
  check_args(data, k);
  const std::size_t n = data.size();
  Codebook cb;
  cb.bit_width = options.bit_width;
  cb.indices.assign(n, 0);

  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  if (!exact_codebook(sorted, k, cb.centroids)) {
    auto& c = cb.centroids;
    c = linear_init(sorted.front(), sorted.back(), k);
    std::vector<std::uint32_t> prev;
    bool reseeded = false;
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
      kernels::serial::assign_nearest(data, c, cb.indices);
      if (cb.indices == prev && !reseeded) break;
      prev = cb.indices;

      std::vector<std::size_t> counts(k, 0);
      std::vector<double> sums(k, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        ++counts[cb.indices[i]];
        sums[cb.indices[i]] += data[i];
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] != 0) c[j] = sums[j] / static_cast<double>(counts[j]);
      }
      reseeded = false;
      if (std::find(counts.begin(), counts.end(), 0U) != counts.end()) {
        reseeded = reseed_empty(data, cb.indices, c, counts);
        std::sort(c.begin(), c.end());
      }
    }
  }
  kernels::serial::assign_nearest(data, cb.centroids, cb.indices);
  return cb;
}

double compression_rate(double n, double b, double k) {
  if (!(k >= 1.0) || !(n >= k) || !(b >= 1.0)) {
    throw std::invalid_argument("compression rate: need n >= k >= 1 and b >= 1");
  }
  return n * b / (n * std::log2(k) + k * b);
}

double compression_rate_encoded(std::uint64_t n, std::uint32_t b, std::uint64_t k) {
  if (k == 0 || n < k || b == 0) throw std::invalid_argument("compression rate: need n >= k >= 1 and b >= 1");
  const double raw = static_cast<double>(n) * b;
  return raw / static_cast<double>(n * bits_for(k) + k * b);
}

std::vector<std::uint8_t> pack_indices(std::span<const std::uint32_t> values, std::uint32_t bits) {
  std::vector<std::uint8_t> out((values.size() * bits + 7) / 8, 0);
  std::size_t pos = 0;
  for (const auto v : values) {
    if (bits < 32 && (v >> bits) != 0) throw std::out_of_range("index does not fit in the bit width");
    for (std::uint32_t b = 0; b < bits; ++b, ++pos) {
      if ((v >> b) & 1U) out[pos / 8] |= static_cast<std::uint8_t>(1U << (pos % 8));
    }
  }
  return out;
}

std::vector<std::uint32_t> unpack_indices(std::span<const std::uint8_t> bytes, std::size_t count,
                                          std::uint32_t bits) {
  if (bytes.size() * 8 < count * bits) throw std::out_of_range("packed indices are truncated");
  std::vector<std::uint32_t> out(count, 0);
  std::size_t pos = 0;
  for (auto& v : out) {
    for (std::uint32_t b = 0; b < bits; ++b, ++pos) {
      if ((bytes[pos / 8] >> (pos % 8)) & 1U) v |= 1U << b;
    }
  }
  return out;
}

}  // namespace fogcache::fedcompress
