#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fogcache::fedcompress {

/// Shared-weight codebook for one layer: every weight is replaced by one of
/// k centroids.
struct Codebook {
  std::vector<double> centroids;       // ascending
  std::vector<std::uint32_t> indices;  // one per weight
  std::uint32_t bit_width = 32;        // b, bits charged per centroid

  std::size_t k() const { return centroids.size(); }
  std::size_t n() const { return indices.size(); }
  /// ceil(log2 k); zero for k == 1.
  std::uint32_t index_bits() const;
  /// n * ceil(log2 k) + k * b.
  std::uint64_t payload_bits() const;
  std::vector<double> decode() const;
  /// Sum of squared reconstruction errors against `data`.
  double sse(std::span<const double> data) const;
};

struct KmeansOptions {
  std::size_t max_iterations = 300;
  std::uint32_t bit_width = 32;
};

/// One-dimensional Lloyd's algorithm from k centroids spaced linearly between
/// min and max of the data, run until the assignment stops changing or
/// max_iterations is reached. A cluster left empty is re-seeded at the point
/// farthest from its centroid. When k is at least the number of distinct
/// values the codebook is exact. Deterministic in (data, k).
///
/// Throws std::invalid_argument for empty data, k == 0 or k > data.size().
Codebook kmeans_quantize(std::span<const double> data, std::size_t k,
                         const KmeansOptions& options = {});

/// Direct O(n k) implementation of the same algorithm without sorting.
Codebook kmeans_quantize_reference(std::span<const double> data, std::size_t k,
                                   const KmeansOptions& options = {});

/// n b / (n log2 k + k b).
double compression_rate(double n, double b, double k);

/// Same ratio with ceil(log2 k) index bits, i.e. what the encoder achieves.
double compression_rate_encoded(std::uint64_t n, std::uint32_t b, std::uint64_t k);

/// Bits per index for k centroids: ceil(log2 k).
std::uint32_t bits_for(std::uint64_t k);

/// LSB-first bit packing of `values`, each `bits` wide, padded to a byte.
std::vector<std::uint8_t> pack_indices(std::span<const std::uint32_t> values, std::uint32_t bits);
std::vector<std::uint32_t> unpack_indices(std::span<const std::uint8_t> bytes, std::size_t count,
                                          std::uint32_t bits);

}  // namespace fogcache::fedcompress
