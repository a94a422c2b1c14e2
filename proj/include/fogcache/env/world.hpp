#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fogcache/env/channel.hpp"
#include "fogcache/env/popularity.hpp"

namespace fogcache::env {

/// Thrown when an operation would break a cache invariant.
class CacheError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct UserLink {
  double distance_m = 0.0;
  std::vector<std::uint8_t> rb;  // one-hot, length M
};

/// One F-AP's cache and radio state.
///
/// Cached contents are kept as a presence vector indexed by content id and as
/// an ascending id list; "cache slot i" (1-based) names the i-th entry of that
/// list.
class FapState {
 public:
  FapState() = default;
  FapState(FapId id, double capacity_mb, std::size_t num_contents, std::vector<UserLink> users);

  FapId id() const { return id_; }
  double capacity_mb() const { return capacity_mb_; }
  double used_mb() const { return used_mb_; }
  std::size_t num_contents() const { return present_.size(); }
  std::size_t num_users() const { return users_.size(); }
  const std::vector<UserLink>& users() const { return users_; }

  bool contains(ContentId f) const { return present_[f] != 0; }
  std::span<const std::uint8_t> presence() const { return present_; }
  std::span<const ContentId> slots() const { return slots_; }
  std::size_t occupied() const { return slots_.size(); }

  /// True when `size_mb` more would exceed capacity.
  bool full_for(double size_mb) const;

  // Raw mutation used by apply_cache_update; keeps both views in sync.
  void insert(ContentId f, double size_mb);
  void erase(ContentId f, double size_mb);

 private:
  FapId id_ = 0;
  double capacity_mb_ = 0.0;
  double used_mb_ = 0.0;
  std::vector<std::uint8_t> present_;
  std::vector<ContentId> slots_;
  std::vector<UserLink> users_;
};

struct RequestEvent {
  std::uint64_t time_slot = 0;
  FapId fap = 0;
  std::uint32_t user = 0;
  ContentId content = 0;
};

enum class Route : std::uint8_t { Local, Neighbor, Cloud };

const char* route_name(Route r);

struct ServiceOutcome {
  Route route = Route::Cloud;
  FapId source = 0;          // serving neighbor when route == Neighbor
  double access_delay_s = 0; // d^c_n for this user and content
  double delay_s = 0;        // total delay of the request
};

/// Presence vectors of every F-AP, captured at slot start for neighbor lookup.
using CacheSnapshot = std::vector<std::vector<std::uint8_t>>;

struct World {
  Catalog catalog;
  PopularityModel popularity;
  DelayModel delay;
  std::vector<FapState> faps;
  // Downlink rate per F-AP per user, fixed at setup.
  std::vector<std::vector<double>> user_rate_bps;

  std::size_t num_faps() const { return faps.size(); }
  std::size_t num_contents() const { return catalog.size(); }

  CacheSnapshot snapshot() const;

  /// Recomputes user_rate_bps from the current links and delay model.
  void refresh_rates();

  /// Throws CacheError if any F-AP exceeds its capacity.
  void check_capacity() const;
};

/// Parameters for building a world.
struct WorldSpec {
  std::size_t num_contents = 200;
  double content_size_mb = 1.0;
  std::size_t num_faps = 5;
  std::size_t users_per_fap = 10;
  std::size_t num_rbs = 10;
  double capacity_mb = 20.0;
  double skewness = 0.8;
  double plateau = 0.1;
  double shuffle_fraction = 0.0;
  double coverage_radius_m = 150.0;
  double min_distance_m = 10.0;
  double interference_factor = 0.01;
  DelayModel delay;  // interference_w is filled in by build_world
};

/// Seeded world construction: popularity, user placement (uniform over each
/// F-AP's coverage annulus), RB assignment (user u gets RB u mod M) and
/// interference.
World build_world(const WorldSpec& spec, std::uint64_t seed);

/// Routes a request: local cache, else the lowest-id neighbor caching the
/// content, else the cloud. Neighbor caches are read from `neighbors` when
/// given, otherwise from the live world.
ServiceOutcome serve_request(const World& world, const RequestEvent& event,
                             const CacheSnapshot* neighbors = nullptr);

/// Inserts `requested` into the F-AP's cache after a cloud fetch.
///
/// With free space the content is inserted and `evict` must be empty. On a
/// full cache an empty `evict` is the no-op action; otherwise the evicted
/// content is removed first. Throws CacheError when the route was not Cloud,
/// when the evicted content is not cached, or when the content still does not
/// fit after the eviction.
void apply_cache_update(FapState& fap, const Catalog& catalog, Route route, ContentId requested,
                        std::optional<ContentId> evict);

}  // namespace fogcache::env
