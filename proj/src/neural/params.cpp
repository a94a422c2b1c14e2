#include "fogcache/neural/params.hpp"

#include <string>

#include <json.hpp>

#include "fogcache/io/binary.hpp"

namespace fogcache::neural {

namespace {
constexpr std::string_view kMagic = "FCLP";

template <typename Op>
void zip(LayeredParams& a, const LayeredParams& b, Op op) {
  a.require_conformable(b);
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    auto& x = a.layer(l);
    const auto& y = b.layer(l);
    for (std::size_t i = 0; i < x.weights.size(); ++i) op(x.weights[i], y.weights[i]);
    for (std::size_t i = 0; i < x.biases.size(); ++i) op(x.biases[i], y.biases[i]);
  }
}
}  // namespace

Layer::Layer(std::size_t in, std::size_t out)
    : in_dim(in), out_dim(out), weights(in * out, 0.0), biases(out, 0.0) {}

LayeredParams::LayeredParams(std::vector<Layer> layers) : layers_(std::move(layers)) { validate(); }

std::size_t LayeredParams::total_size() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.size();
  return n;
}

bool LayeredParams::conformable(const LayeredParams& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!layers_[i].same_shape(other.layers_[i])) return false;
  }
  return true;
}

void LayeredParams::require_conformable(const LayeredParams& other) const {
  if (!conformable(other)) throw ShapeError("parameter sets are not conformable");
}

void LayeredParams::validate() const {
  for (const auto& l : layers_) {
    if (l.weights.size() != l.in_dim * l.out_dim || l.biases.size() != l.out_dim) {
      throw ShapeError("layer arrays do not match their declared dimensions");
    }
  }
}

LayeredParams LayeredParams::zeros_like() const {
  std::vector<Layer> out;
  out.reserve(layers_.size());
  for (const auto& l : layers_) out.emplace_back(l.in_dim, l.out_dim);
  return LayeredParams(std::move(out));
}

void LayeredParams::set_zero() {
  for (auto& l : layers_) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.biases.begin(), l.biases.end(), 0.0);
  }
}

LayeredParams& LayeredParams::operator+=(const LayeredParams& other) {
  zip(*this, other, [](double& x, double y) { x += y; });
  return *this;
}

LayeredParams& LayeredParams::operator-=(const LayeredParams& other) {
  zip(*this, other, [](double& x, double y) { x -= y; });
  return *this;
}

LayeredParams& LayeredParams::operator*=(double s) {
  for (auto& l : layers_) {
    for (auto& w : l.weights) w *= s;
    for (auto& b : l.biases) b *= s;
  }
  return *this;
}

void LayeredParams::axpy(double s, const LayeredParams& other) {
  zip(*this, other, [s](double& x, double y) { x += s * y; });
}

double LayeredParams::squared_norm() const {
  double acc = 0.0;
  for (const auto& l : layers_) {
    for (const double w : l.weights) acc += w * w;
    for (const double b : l.biases) acc += b * b;
  }
  return acc;
}

bool LayeredParams::operator==(const LayeredParams& other) const {
  if (!conformable(other)) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].weights != other.layers_[i].weights) return false;
    if (layers_[i].biases != other.layers_[i].biases) return false;
  }
  return true;
}

std::uint64_t LayeredParams::checksum() const {
  std::vector<std::uint8_t> buf;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& l : layers_) {
    buf.clear();
    for (const double w : l.weights) io::put_f64(buf, w);
    for (const double b : l.biases) io::put_f64(buf, b);
    h = io::fnv1a(buf, h);
  }
  return h;
}

std::vector<std::uint8_t> LayeredParams::serialize() const {
  nlohmann::json header;
  header["format"] = "fogcache.params";
  header["version"] = 1;
  header["layers"] = nlohmann::json::array();
  for (const auto& l : layers_) header["layers"].push_back({{"in", l.in_dim}, {"out", l.out_dim}});

  std::vector<std::uint8_t> out;
  io::put_frame_header(out, kMagic, header.dump());
  out.reserve(out.size() + total_size() * 8);
  for (const auto& l : layers_) {
    for (const double w : l.weights) io::put_f64(out, w);
    for (const double b : l.biases) io::put_f64(out, b);
  }
  return out;
}

LayeredParams LayeredParams::deserialize(std::span<const std::uint8_t> bytes) {
  io::Reader in(bytes);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(io::read_frame_header(in, kMagic));
  } catch (const nlohmann::json::exception& e) {
    throw io::FormatError(std::string("params header: ") + e.what());
  }
  if (header.value("format", "") != "fogcache.params" || header.value("version", 0) != 1) {
    throw io::FormatError("params header: unsupported format");
  }
  std::vector<Layer> layers;
  for (const auto& d : header.at("layers")) {
    Layer l(d.at("in").get<std::size_t>(), d.at("out").get<std::size_t>());
    for (auto& w : l.weights) w = in.f64();
    for (auto& b : l.biases) b = in.f64();
    layers.push_back(std::move(l));
  }
  if (in.remaining() != 0) throw io::FormatError("params: trailing bytes");
  return LayeredParams(std::move(layers));
}

LayeredParams operator+(LayeredParams a, const LayeredParams& b) { return a += b; }
LayeredParams operator-(LayeredParams a, const LayeredParams& b) { return a -= b; }
LayeredParams operator*(LayeredParams a, double s) { return a *= s; }

void sgd_step(LayeredParams& params, const LayeredParams& grad, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  params.axpy(-lr, grad);
}

}  // namespace fogcache::neural
