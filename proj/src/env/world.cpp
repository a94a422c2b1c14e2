#include "fogcache/env/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fogcache::env {

namespace {
// Tolerance on capacity sums, which accumulate floating-point sizes.
constexpr double kCapacitySlack = 1e-9;
}  // namespace

FapState::FapState(FapId id, double capacity_mb, std::size_t num_contents,
                   std::vector<UserLink> users)
    : id_(id), capacity_mb_(capacity_mb), present_(num_contents, 0), users_(std::move(users)) {
  if (!(capacity_mb >= 0.0)) throw std::invalid_argument("F-AP capacity must be non-negative");
  if (users_.empty()) throw std::invalid_argument("F-AP needs at least one user");
}

bool FapState::full_for(double size_mb) const {
  return used_mb_ + size_mb > capacity_mb_ + kCapacitySlack;
}

void FapState::insert(ContentId f, double size_mb) {
  if (present_.at(f)) throw CacheError("content already cached");
  present_[f] = 1;
  slots_.insert(std::upper_bound(slots_.begin(), slots_.end(), f), f);
  used_mb_ += size_mb;
}

void FapState::erase(ContentId f, double size_mb) {
  if (!present_.at(f)) throw CacheError("content " + std::to_string(f) + " is not cached");
  present_[f] = 0;
  slots_.erase(std::lower_bound(slots_.begin(), slots_.end(), f));
  used_mb_ -= size_mb;
  if (slots_.empty()) used_mb_ = 0.0;
}

const char* route_name(Route r) {
  switch (r) {
    case Route::Local: return "local";
    case Route::Neighbor: return "neighbor";
    case Route::Cloud: return "cloud";
  }
  return "?";
}

CacheSnapshot World::snapshot() const {
  CacheSnapshot snap;
  snap.reserve(faps.size());
  for (const auto& fap : faps) snap.emplace_back(fap.presence().begin(), fap.presence().end());
  return snap;
}

void World::refresh_rates() {
  user_rate_bps.assign(faps.size(), {});
  for (std::size_t n = 0; n < faps.size(); ++n) {
    auto& rates = user_rate_bps[n];
    rates.resize(faps[n].num_users());
    for (std::size_t u = 0; u < rates.size(); ++u) rates[u] = downlink_rate(delay, faps[n], u);
  }
}

void World::check_capacity() const {
  for (const auto& fap : faps) {
    double used = 0.0;
    for (const auto f : fap.slots()) used += catalog.size_mb[f];
    if (used > fap.capacity_mb() + kCapacitySlack) {
      throw CacheError("F-AP " + std::to_string(fap.id()) + " exceeds its cache capacity");
    }
  }
}

World build_world(const WorldSpec& spec, std::uint64_t seed) {
  if (spec.num_faps == 0 || spec.users_per_fap == 0 || spec.num_rbs == 0) {
    throw std::invalid_argument("world: F-AP, user and RB counts must be positive");
  }
  if (!(spec.coverage_radius_m > spec.min_distance_m) || !(spec.min_distance_m > 0.0)) {
    throw std::invalid_argument("world: need 0 < min distance < coverage radius");
  }

  World world;
  world.catalog = Catalog::uniform(spec.num_contents, spec.content_size_mb);
  world.popularity = build_popularity(world.catalog, spec.num_faps, spec.skewness, spec.plateau,
                                      seed, spec.shuffle_fraction);

  world.delay = spec.delay;
  const double edge_gain = channel_gain(spec.coverage_radius_m, world.delay.pathloss_exponent);
  world.delay.interference_w.assign(
      spec.num_rbs, interference_power(spec.interference_factor, spec.num_faps,
                                       world.delay.transmit_power_w, edge_gain));
  world.delay.validate();

  // Placement depends only on (seed, F-AP index, user index), so sweeps over
  // other parameters keep identical user geometry.
  const double r0sq = spec.min_distance_m * spec.min_distance_m;
  const double r1sq = spec.coverage_radius_m * spec.coverage_radius_m;
  world.faps.reserve(spec.num_faps);
  for (std::size_t n = 0; n < spec.num_faps; ++n) {
    Rng rng(derive_seed(seed, stream::kPlacement, n));
    std::vector<UserLink> users(spec.users_per_fap);
    for (std::size_t u = 0; u < users.size(); ++u) {
      users[u].distance_m = std::sqrt(r0sq + rng.uniform() * (r1sq - r0sq));
      users[u].rb.assign(spec.num_rbs, 0);
      users[u].rb[u % spec.num_rbs] = 1;
    }
    world.faps.emplace_back(static_cast<FapId>(n), spec.capacity_mb, spec.num_contents,
                            std::move(users));
  }
  world.refresh_rates();
  return world;
}

ServiceOutcome serve_request(const World& world, const RequestEvent& event,
                             const CacheSnapshot* neighbors) {
  const auto& fap = world.faps.at(event.fap);
  const double rate = world.user_rate_bps.at(event.fap).at(event.user);
  ServiceOutcome out;
  out.access_delay_s = user_delay(rate, world.catalog.size_mb.at(event.content));

  if (fap.contains(event.content)) {
    out.route = Route::Local;
    out.source = event.fap;
    out.delay_s = out.access_delay_s;
    return out;
  }
  for (std::size_t l = 0; l < world.faps.size(); ++l) {
    if (l == event.fap) continue;
    const bool cached = neighbors ? (*neighbors)[l][event.content] != 0
                                  : world.faps[l].contains(event.content);
    if (cached) {
      out.route = Route::Neighbor;
      out.source = static_cast<FapId>(l);
      out.delay_s = out.access_delay_s + world.delay.fap_to_fap_delay_s;
      return out;
    }
  }
  out.route = Route::Cloud;
  out.source = event.fap;
  out.delay_s = out.access_delay_s + world.delay.cloud_to_fap_delay_s;
  return out;
}

void apply_cache_update(FapState& fap, const Catalog& catalog, Route route, ContentId requested,
                        std::optional<ContentId> evict) {
  if (route != Route::Cloud) throw CacheError("cache updates are only permitted after a cloud fetch");
  const double size = catalog.size_mb.at(requested);
  if (!fap.full_for(size)) {
    if (evict) throw CacheError("eviction requested while the cache has free space");
    fap.insert(requested, size);
    return;
  }
  if (!evict) return;
  if (!fap.contains(*evict)) throw CacheError("eviction target is not cached");
  fap.erase(*evict, catalog.size_mb.at(*evict));
  if (fap.full_for(size)) throw CacheError("content does not fit after eviction");
  fap.insert(requested, size);
}

}  // namespace fogcache::env
