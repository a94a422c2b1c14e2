#include "fogcache/federation/federation.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "fogcache/io/csv.hpp"

namespace fogcache::federation {

using neural::LayeredParams;

void FedConfig::validate() const {
  if (local_updates == 0) throw std::invalid_argument("federation: X must be at least 1");
  if (!(schedule.b > 0.0) || !(schedule.a + 1.0 > 0.0)) {
    throw std::invalid_argument("federation: step schedule must be positive");
  }
  if (!(compression.keep_fraction > 0.0 && compression.keep_fraction <= 1.0)) {
    throw std::invalid_argument("federation: keep fraction must lie in (0, 1]");
  }
  if (compression.clusters == 0) throw std::invalid_argument("federation: clusters must be positive");
}

LayeredParams aggregate(const LayeredParams& global, std::span<const LayeredParams> deltas,
                        std::span<const double> weights) {
  if (deltas.size() != weights.size()) throw std::invalid_argument("aggregate: one weight per delta");
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("aggregate: weights must be non-negative");
    total += w;
  }
  LayeredParams next = global;
  if (total <= 0.0) return next;
  LayeredParams sum = global.zeros_like();
  for (std::size_t n = 0; n < deltas.size(); ++n) {
    if (weights[n] > 0.0) sum.axpy(weights[n], deltas[n]);
  }
  next.axpy(1.0 / total, sum);
  return next;
}

RoundRecord run_period(LayeredParams& global, std::span<FedClient* const> clients,
                       const FedConfig& cfg, std::size_t period, const UpdateHook& hook) {
  cfg.validate();
  const auto N = static_cast<std::ptrdiff_t>(clients.size());
  RoundRecord rec;
  rec.period = period;
  rec.clients.resize(clients.size());

  for (std::ptrdiff_t n = 0; n < N; ++n) {
    clients[n]->load(global);
  }
  std::vector<double> loss_sum(clients.size(), 0.0);
  for (std::size_t i = 0; i < cfg.local_updates; ++i) {
    if (hook) hook(i);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < N; ++n) {
      if (const auto loss = clients[n]->local_step()) {
        loss_sum[n] += *loss;
        ++rec.clients[n].steps;
      }
    }
  }

  std::vector<LayeredParams> deltas(clients.size());
  std::vector<double> weights(clients.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < N; ++n) {
    auto& cr = rec.clients[n];
    cr.client = static_cast<std::size_t>(n);
    cr.dataset_size = clients[n]->dataset_size();
    cr.mean_loss = cr.steps ? loss_sum[n] / static_cast<double>(cr.steps)
                            : std::numeric_limits<double>::quiet_NaN();
    weights[n] = cfg.equal_weights ? 1.0 : cr.dataset_size;
    const auto& local = clients[n]->params();
    cr.raw_bits = local.total_size() * cfg.compression.bit_width;
    if (cfg.quantize) {
      const auto q = fedcompress::compress(global, local, cr.dataset_size, cfg.compression);
      cr.bit_cost = q.bit_cost();
      cr.payload_bits = q.payload_bits();
      cr.kept_layers = q.num_kept();
      deltas[n] = fedcompress::decode(q, global);
    } else {
      cr.bit_cost = cr.payload_bits = cr.raw_bits;
      cr.kept_layers = local.num_layers();
      deltas[n] = local - global;
    }
  }

  auto next = aggregate(global, deltas, weights);
  rec.update_norm = std::sqrt((next - global).squared_norm());
  global = std::move(next);
  rec.checksum = global.checksum();

  double loss = 0.0, bits = 0.0, raw = 0.0;
  std::size_t trained = 0;
  for (const auto& cr : rec.clients) {
    bits += static_cast<double>(cr.bit_cost);
    raw += static_cast<double>(cr.raw_bits);
    if (cr.steps) {
      loss += cr.mean_loss;
      ++trained;
    }
  }
  rec.mean_loss = trained ? loss / static_cast<double>(trained) : std::numeric_limits<double>::quiet_NaN();
  rec.ratio = raw > 0.0 ? bits / raw : 0.0;
  return rec;
}

std::vector<RoundRecord> run_training(LayeredParams& global, std::span<FedClient* const> clients,
                                      const FedConfig& cfg,
                                      const std::function<void(std::size_t, std::size_t)>& hook) {
  std::vector<RoundRecord> out;
  out.reserve(cfg.periods);
  for (std::size_t y = 0; y < cfg.periods; ++y) {
    UpdateHook h;
    if (hook) h = [&](std::size_t i) { hook(y, i); };
    out.push_back(run_period(global, clients, cfg, y, h));
  }
  return out;
}

double uploaded_ratio(std::span<const RoundRecord> records) {
  if (records.empty()) throw std::invalid_argument("uploaded ratio: no records");
  double bits = 0.0, raw = 0.0;
  for (const auto& r : records) {
    for (const auto& c : r.clients) {
      bits += static_cast<double>(c.bit_cost);
      raw += static_cast<double>(c.raw_bits);
    }
  }
  return raw > 0.0 ? bits / raw : 0.0;
}

void write_rounds_csv(std::ostream& out, std::span<const RoundRecord> records,
                      std::span<const double> hit_rate_by_period) {
  io::CsvWriter csv(out);
  csv.header({"period", "client", "dataset_size", "bit_cost", "payload_bits", "raw_bits", "kept_layers",
              "ratio", "cumulative_ratio", "loss", "global_checksum", "update_norm", "hit_rate"});
  double bits = 0.0, raw = 0.0;
  for (const auto& r : records) {
    for (const auto& c : r.clients) {
      bits += static_cast<double>(c.bit_cost);
      raw += static_cast<double>(c.raw_bits);
    }
    const double hit = r.period < hit_rate_by_period.size() ? hit_rate_by_period[r.period]
                                                             : std::numeric_limits<double>::quiet_NaN();
    for (const auto& c : r.clients) {
      csv.row(r.period, c.client, c.dataset_size, c.bit_cost, c.payload_bits, c.raw_bits, c.kept_layers,
              c.raw_bits ? static_cast<double>(c.bit_cost) / static_cast<double>(c.raw_bits) : 0.0,
              raw > 0.0 ? bits / raw : 0.0, c.mean_loss, io::hex64(r.checksum), r.update_norm, hit);
    }
  }
}

}  // namespace fogcache::federation
