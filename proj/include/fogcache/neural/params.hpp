#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fogcache::neural {

/// Thrown when two parameter sets (or a parameter set and an input) disagree on shape.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One dense layer: in_dim * out_dim weights stored input-major (weight
/// from input i to output o at i * out_dim + o) and out_dim biases.
struct Layer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  Layer() = default;
  Layer(std::size_t in, std::size_t out);

  std::size_t size() const { return weights.size() + biases.size(); }
  bool same_shape(const Layer& other) const {
    return in_dim == other.in_dim && out_dim == other.out_dim;
  }
};

/// A model as an ordered list of dense layers.
class LayeredParams {
 public:
  LayeredParams() = default;
  explicit LayeredParams(std::vector<Layer> layers);

  std::size_t num_layers() const { return layers_.size(); }
  std::size_t total_size() const;
  Layer& layer(std::size_t i) { return layers_.at(i); }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  std::span<Layer> layers() { return layers_; }
  std::span<const Layer> layers() const { return layers_; }

  bool conformable(const LayeredParams& other) const;
  /// Throws ShapeError unless conformable.
  void require_conformable(const LayeredParams& other) const;
  /// Throws ShapeError if any array length disagrees with its declared dims.
  void validate() const;

  /// Same shapes, all zeros.
  LayeredParams zeros_like() const;
  void set_zero();

  LayeredParams& operator+=(const LayeredParams& other);
  LayeredParams& operator-=(const LayeredParams& other);
  LayeredParams& operator*=(double s);
  /// this += s * other.
  void axpy(double s, const LayeredParams& other);

  double squared_norm() const;
  bool operator==(const LayeredParams& other) const;

  /// FNV-1a over the little-endian bytes of every value, in layer order.
  std::uint64_t checksum() const;

  /// "FCLP", u32 header length, JSON header with the layer dims, then every
  /// layer's weights followed by its biases as little-endian float64.
  std::vector<std::uint8_t> serialize() const;
  static LayeredParams deserialize(std::span<const std::uint8_t> bytes);

 private:
  std::vector<Layer> layers_;
};

LayeredParams operator+(LayeredParams a, const LayeredParams& b);
LayeredParams operator-(LayeredParams a, const LayeredParams& b);
LayeredParams operator*(LayeredParams a, double s);

/// params -= lr * grad. Throws ShapeError on non-conformable inputs and
/// std::invalid_argument unless lr > 0.
void sgd_step(LayeredParams& params, const LayeredParams& grad, double lr);

}  // namespace fogcache::neural
