#include "fogcache/fedcompress/update.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fogcache/io/binary.hpp"

namespace fogcache::fedcompress {

using neural::LayeredParams;

namespace {
constexpr std::string_view kMagic = "FCQU";

nlohmann::json header_json(const QuantizedUpdate& u) {
  nlohmann::json h;
  h["format"] = "fogcache.update";
  h["version"] = 1;
  h["bit_width"] = u.bit_width;
  h["dataset_size"] = u.dataset_size;
  h["layers"] = nlohmann::json::array();
  for (const auto& l : u.layers) {
    h["layers"].push_back({{"in", l.in_dim},
                           {"out", l.out_dim},
                           {"kept", l.kept},
                           {"k", l.kept ? l.codebook.k() : 0}});
  }
  return h;
}
}  // namespace

std::vector<double> layer_sensitivity(const LayeredParams& before, const LayeredParams& after,
                                      bool include_biases) {
  before.require_conformable(after);
  std::vector<double> out(before.num_layers(), 0.0);
  for (std::size_t l = 0; l < out.size(); ++l) {
    const auto& a = before.layer(l);
    const auto& b = after.layer(l);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.weights.size(); ++i) acc += std::abs(b.weights[i] - a.weights[i]);
    std::size_t count = a.weights.size();
    if (include_biases) {
      for (std::size_t i = 0; i < a.biases.size(); ++i) acc += std::abs(b.biases[i] - a.biases[i]);
      count += a.biases.size();
    }
    out[l] = count ? acc / static_cast<double>(count) : 0.0;
  }
  return out;
}

std::vector<std::size_t> select_layers(std::span<const double> sensitivity, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("keep fraction must lie in (0, 1]");
  }
  const std::size_t L = sensitivity.size();
  // Guard against 0.9 * 10 evaluating to 9.000000000000002.
  const auto keep = std::min<std::size_t>(
      L, static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(L) - 1e-9)));
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sensitivity[a] > sensitivity[b]; });
  order.resize(std::max<std::size_t>(keep, L ? 1 : 0));
  return order;
}

double implied_threshold(std::span<const double> sensitivity, std::span<const std::size_t> kept) {
  double chi = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < sensitivity.size(); ++l) {
    if (std::find(kept.begin(), kept.end(), l) == kept.end()) chi = std::max(chi, sensitivity[l]);
  }
  return chi;
}

std::size_t QuantizedUpdate::num_kept() const {
  return static_cast<std::size_t>(
      std::count_if(layers.begin(), layers.end(), [](const LayerUpdate& l) { return l.kept; }));
}

std::uint64_t QuantizedUpdate::payload_bits() const {
  std::uint64_t bits = 0;
  for (const auto& l : layers) {
    if (l.kept) bits += l.codebook.payload_bits();
  }
  return bits;
}

std::uint64_t QuantizedUpdate::header_bits() const {
  return 8ULL * (kMagic.size() + 4 + header_json(*this).dump().size());
}

std::uint64_t QuantizedUpdate::raw_bits() const {
  std::uint64_t n = 0;
  for (const auto& l : layers) n += l.size();
  return n * bit_width;
}

std::vector<std::uint8_t> QuantizedUpdate::serialize() const {
  std::vector<std::uint8_t> out;
  io::put_frame_header(out, kMagic, header_json(*this).dump());
  for (const auto& l : layers) {
    if (!l.kept) continue;
    for (const double c : l.codebook.centroids) io::put_f64(out, c);
    const auto packed = pack_indices(l.codebook.indices, l.codebook.index_bits());
    out.insert(out.end(), packed.begin(), packed.end());
  }
  return out;
}

QuantizedUpdate QuantizedUpdate::deserialize(std::span<const std::uint8_t> bytes) {
  io::Reader in(bytes);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(io::read_frame_header(in, kMagic));
  } catch (const nlohmann::json::exception& e) {
    throw io::FormatError(std::string("update header: ") + e.what());
  }
  if (h.value("format", "") != "fogcache.update" || h.value("version", 0) != 1) {
    throw io::FormatError("update header: unsupported format");
  }
  QuantizedUpdate u;
  u.bit_width = h.at("bit_width").get<std::uint32_t>();
  u.dataset_size = h.at("dataset_size").get<double>();
  for (const auto& d : h.at("layers")) {
    LayerUpdate l;
    l.in_dim = d.at("in").get<std::size_t>();
    l.out_dim = d.at("out").get<std::size_t>();
    l.kept = d.at("kept").get<bool>();
    if (l.kept) {
      const auto k = d.at("k").get<std::size_t>();
      if (k == 0 || k > l.size()) throw io::FormatError("update header: bad cluster count");
      l.codebook.bit_width = u.bit_width;
      l.codebook.centroids.resize(k);
      for (auto& c : l.codebook.centroids) c = in.f64();
      const auto bits = bits_for(k);
      const auto packed = in.take((l.size() * bits + 7) / 8);
      l.codebook.indices = unpack_indices(packed, l.size(), bits);
      for (const auto i : l.codebook.indices) {
        if (i >= k) throw io::FormatError("update payload: index outside the codebook");
      }
    }
    u.layers.push_back(std::move(l));
  }
  if (in.remaining() != 0) throw io::FormatError("update: trailing bytes");
  return u;
}

QuantizedUpdate compress(const LayeredParams& before, const LayeredParams& after,
                         double dataset_size, const CompressOptions& options) {
  if (options.clusters == 0) throw std::invalid_argument("compress: clusters must be positive");
  const auto sens = layer_sensitivity(before, after, options.include_biases);
  const auto kept = select_layers(sens, options.keep_fraction);

  QuantizedUpdate u;
  u.dataset_size = dataset_size;
  u.bit_width = options.bit_width;
  u.layers.resize(before.num_layers());
  for (std::size_t l = 0; l < u.layers.size(); ++l) {
    u.layers[l].in_dim = before.layer(l).in_dim;
    u.layers[l].out_dim = before.layer(l).out_dim;
  }
  for (const auto l : kept) {
    const auto& a = before.layer(l);
    const auto& b = after.layer(l);
    std::vector<double> delta;
    delta.reserve(a.size());
    for (std::size_t i = 0; i < a.weights.size(); ++i) delta.push_back(b.weights[i] - a.weights[i]);
    for (std::size_t i = 0; i < a.biases.size(); ++i) delta.push_back(b.biases[i] - a.biases[i]);
    const std::size_t k = std::min(options.clusters, delta.size());
    u.layers[l].kept = true;
    u.layers[l].codebook = kmeans_quantize(delta, k, {options.max_iterations, options.bit_width});
  }
  return u;
}

LayeredParams decode(const QuantizedUpdate& update, const LayeredParams& reference) {
  if (update.layers.size() != reference.num_layers()) throw neural::ShapeError("update has the wrong layer count");
  LayeredParams out = reference.zeros_like();
  for (std::size_t l = 0; l < update.layers.size(); ++l) {
    const auto& u = update.layers[l];
    auto& dst = out.layer(l);
    if (u.in_dim != dst.in_dim || u.out_dim != dst.out_dim) {
      throw neural::ShapeError("update layer shape does not match the reference");
    }
    if (!u.kept) continue;
    if (u.codebook.n() != u.size()) throw neural::ShapeError("codebook length does not match the layer");
    const auto values = u.codebook.decode();
    std::copy_n(values.begin(), dst.weights.size(), dst.weights.begin());
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(dst.weights.size()), values.end(), dst.biases.begin());
  }
  return out;
}

}  // namespace fogcache::fedcompress
