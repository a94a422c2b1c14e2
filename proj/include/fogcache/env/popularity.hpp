#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fogcache/rng.hpp"

namespace fogcache::env {

using ContentId = std::uint32_t;
using FapId = std::uint32_t;

/// The content library. Ranks are stored 0-based: rank[f] == 0 is the most
/// popular content (rank 1 in the usual 1-based notation).
struct Catalog {
  std::vector<double> size_mb;
  std::vector<std::uint32_t> rank;

  std::size_t size() const { return size_mb.size(); }

  /// `count` contents of `size_mb` each, ranked by id.
  static Catalog uniform(std::size_t count, double size_mb = 1.0);

  /// Throws std::invalid_argument unless ranks form a permutation and sizes are positive.
  void validate() const;
};

/// Global and per-F-AP request distributions.
struct PopularityModel {
  double skewness = 0.0;
  double plateau = 0.0;
  double shuffle_fraction = 0.0;
  std::vector<double> global;              // P_f
  std::vector<std::vector<double>> local;  // p_{n,f}

  std::size_t num_contents() const { return global.size(); }
  std::size_t num_faps() const { return local.size(); }
};

/// Mandelbrot-Zipf probabilities (rank_f + 1 + plateau)^-skewness, normalized.
std::vector<double> mzipf(std::span<const std::uint32_t> rank, double skewness, double plateau);

/// Builds per-F-AP popularity from the catalog's global rank.
///
/// Each F-AP re-ranks a seeded random subset of round(shuffle_fraction * F)
/// contents among themselves and applies the M-Zipf law to its own ranking;
/// the global vector is the mean of the local ones. With shuffle_fraction == 0
/// every F-AP shares the global ranking.
PopularityModel build_popularity(const Catalog& catalog, std::size_t num_faps, double skewness,
                                 double plateau, std::uint64_t seed,
                                 double shuffle_fraction = 0.0);

/// Convenience overload on a uniform, id-ranked catalog.
PopularityModel build_popularity(std::size_t num_contents, std::size_t num_faps,
                                 double skewness, double plateau, std::uint64_t seed,
                                 double shuffle_fraction = 0.0);

/// Shannon entropy in nats.
double entropy(std::span<const double> distribution);

/// Inverse-CDF sampler over a fixed discrete distribution.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> probabilities);

  std::size_t operator()(Rng& rng) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

}  // namespace fogcache::env
