#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fogcache/fedcompress/quantize.hpp"
#include "fogcache/neural/params.hpp"

namespace fogcache::fedcompress {

/// Mean absolute change of every layer between two conformable parameter sets.
/// Biases are pooled with the weights unless `include_biases` is false.
std::vector<double> layer_sensitivity(const neural::LayeredParams& before,
                                      const neural::LayeredParams& after,
                                      bool include_biases = true);

/// Indices of the ceil(keep_fraction * L) most sensitive layers, in order of
/// decreasing sensitivity; equal sensitivities keep the lower index first.
/// Throws std::invalid_argument unless keep_fraction lies in (0, 1].
std::vector<std::size_t> select_layers(std::span<const double> sensitivity, double keep_fraction);

/// The threshold chi implied by a selection: the largest sensitivity among the
/// dropped layers, or -infinity when every layer is kept.
double implied_threshold(std::span<const double> sensitivity, std::span<const std::size_t> kept);

struct LayerUpdate {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  bool kept = false;
  Codebook codebook;  // empty when dropped

  std::size_t size() const { return in_dim * out_dim + out_dim; }
};

/// A pruned, codebook-compressed model delta.
struct QuantizedUpdate {
  std::vector<LayerUpdate> layers;
  double dataset_size = 0.0;  // D_n
  std::uint32_t bit_width = 32;

  std::size_t num_kept() const;
  /// Sum over kept layers of n * ceil(log2 k) + k * b.
  std::uint64_t payload_bits() const;
  /// Bits of the serialized framing and JSON header.
  std::uint64_t header_bits() const;
  std::uint64_t bit_cost() const { return payload_bits() + header_bits(); }
  /// Total parameter count times b: the cost of an uncompressed upload.
  std::uint64_t raw_bits() const;

  /// "FCQU", u32 header length, JSON header (layer dims, kept flags, k, b,
  /// D_n), then per kept layer its centroids as little-endian float64 followed
  /// by its indices bit-packed LSB-first at ceil(log2 k) bits, padded to a byte.
  std::vector<std::uint8_t> serialize() const;
  static QuantizedUpdate deserialize(std::span<const std::uint8_t> bytes);
};

struct CompressOptions {
  double keep_fraction = 1.0;
  /// Centroids per kept layer, clamped to the layer size.
  std::size_t clusters = 32;
  std::uint32_t bit_width = 32;
  bool include_biases = true;
  std::size_t max_iterations = 300;

  static constexpr std::size_t kExact = std::numeric_limits<std::size_t>::max();
};

/// Quantizes after - before: the most sensitive layers are k-means coded and
/// the rest are dropped.
QuantizedUpdate compress(const neural::LayeredParams& before, const neural::LayeredParams& after,
                         double dataset_size, const CompressOptions& options = {});

/// Server-side inverse: kept layers become centroids[indices], dropped layers
/// zeros. Throws neural::ShapeError when the update does not match `reference`.
neural::LayeredParams decode(const QuantizedUpdate& update, const neural::LayeredParams& reference);

}  // namespace fogcache::fedcompress
