#include "fogcache/env/popularity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fogcache::env {

Catalog Catalog::uniform(std::size_t count, double size_mb) {
  Catalog c;
  c.size_mb.assign(count, size_mb);
  c.rank.resize(count);
  std::iota(c.rank.begin(), c.rank.end(), 0U);
  return c;
}

void Catalog::validate() const {
  if (size_mb.empty()) throw std::invalid_argument("catalog: no contents");
  if (rank.size() != size_mb.size()) throw std::invalid_argument("catalog: rank length mismatch");
  std::vector<bool> seen(rank.size(), false);
  for (const auto r : rank) {
    if (r >= rank.size() || seen[r]) throw std::invalid_argument("catalog: rank is not a permutation");
    seen[r] = true;
  }
  for (const double s : size_mb) {
    if (!(s > 0.0)) throw std::invalid_argument("catalog: content sizes must be positive");
  }
}

std::vector<double> mzipf(std::span<const std::uint32_t> rank, double skewness, double plateau) {
  std::vector<double> p(rank.size());
  double total = 0.0;
  for (std::size_t f = 0; f < rank.size(); ++f) {
    p[f] = std::pow(static_cast<double>(rank[f]) + 1.0 + plateau, -skewness);
    total += p[f];
  }
  for (auto& v : p) v /= total;
  return p;
}

PopularityModel build_popularity(const Catalog& catalog, std::size_t num_faps, double skewness,
                                 double plateau, std::uint64_t seed, double shuffle_fraction) {
  catalog.validate();
  if (num_faps == 0) throw std::invalid_argument("popularity: need at least one F-AP");
  if (!(skewness >= 0.0) || !(plateau >= 0.0)) {
    throw std::invalid_argument("popularity: skewness and plateau must be non-negative");
  }
  if (!(shuffle_fraction >= 0.0 && shuffle_fraction <= 1.0)) {
    throw std::invalid_argument("popularity: shuffle fraction must lie in [0, 1]");
  }

  const std::size_t count = catalog.size();
  const auto shuffled =
      static_cast<std::size_t>(std::llround(shuffle_fraction * static_cast<double>(count)));

  PopularityModel model;
  model.skewness = skewness;
  model.plateau = plateau;
  model.shuffle_fraction = shuffle_fraction;
  model.local.reserve(num_faps);

  for (std::size_t n = 0; n < num_faps; ++n) {
    std::vector<std::uint32_t> rank = catalog.rank;
    if (shuffled > 1) {
      Rng rng(derive_seed(seed, stream::kPopularity, n));
      std::vector<ContentId> ids(count);
      std::iota(ids.begin(), ids.end(), 0U);
      rng.shuffle(std::span<ContentId>(ids));
      ids.resize(shuffled);
      std::sort(ids.begin(), ids.end());
      std::vector<std::uint32_t> ranks(shuffled);
      for (std::size_t i = 0; i < shuffled; ++i) ranks[i] = rank[ids[i]];
      rng.shuffle(std::span<std::uint32_t>(ranks));
      for (std::size_t i = 0; i < shuffled; ++i) rank[ids[i]] = ranks[i];
    }
    model.local.push_back(mzipf(rank, skewness, plateau));
  }

  model.global.assign(count, 0.0);
  for (const auto& row : model.local) {
    for (std::size_t f = 0; f < count; ++f) model.global[f] += row[f];
  }
  for (auto& v : model.global) v /= static_cast<double>(num_faps);
  return model;
}

PopularityModel build_popularity(std::size_t num_contents, std::size_t num_faps,
                                 double skewness, double plateau, std::uint64_t seed,
                                 double shuffle_fraction) {
  if (num_contents == 0) throw std::invalid_argument("popularity: need at least one content");
  return build_popularity(Catalog::uniform(num_contents), num_faps, skewness, plateau, seed,
                          shuffle_fraction);
}

double entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (const double p : distribution) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

DiscreteSampler::DiscreteSampler(std::span<const double> probabilities)
    : cdf_(probabilities.size()) {
  if (probabilities.empty()) throw std::invalid_argument("sampler: empty distribution");
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    cdf_[i] = acc;
  }
  for (auto& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::size_t DiscreteSampler::operator()(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

}  // namespace fogcache::env
