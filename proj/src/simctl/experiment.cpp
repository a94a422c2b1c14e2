#include "fogcache/simctl/experiment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include "fogcache/io/csv.hpp"

namespace fogcache::simctl {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

double decile_mean(const std::vector<double>& v, bool last) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = std::max<std::size_t>(1, v.size() / 10);
  const std::size_t begin = last ? v.size() - n : 0;
  double s = 0.0;
  for (std::size_t i = begin; i < begin + n; ++i) s += v[i];
  return s / static_cast<double>(n);
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void write_metrics_csv(std::ostream& out, const RunResult& result, std::size_t num_faps,
                       PolicyKind policy) {
  out << "slot,policy,mean_hit_rate";
  for (std::size_t n = 0; n < num_faps; ++n) out << ",hit_rate_" << n;
  out << ",avg_delay,local,neighbor,cloud,reward,cumulative_reward,epsilon,uploaded_ratio\n";
  for (const auto& s : result.slots) {
    out << s.slot << ',' << policy_name(policy) << ',' << io::format_double(s.mean_hit_rate);
    for (std::size_t n = 0; n < num_faps; ++n) {
      out << ',' << io::format_double(n < s.hit_rate.size() ? s.hit_rate[n]
                                                            : std::numeric_limits<double>::quiet_NaN());
    }
    out << ',' << io::format_double(s.avg_delay) << ',' << s.local << ',' << s.neighbor << ',' << s.cloud
        << ',' << io::format_double(s.reward) << ',' << io::format_double(s.cumulative_reward) << ','
        << io::format_double(s.epsilon) << ',' << io::format_double(s.uploaded_ratio) << '\n';
  }
}

nlohmann::json summary_json(const SimConfig& cfg, const RunResult& result) {
  const auto& s = result.summary;
  nlohmann::json doc;
  doc["config"] = to_json(cfg);
  doc["policy"] = std::string(policy_name(cfg.policy));
  doc["summary"] = {{"slots_measured", s.slots_measured},
                    {"hit_rate", s.hit_rate},
                    {"avg_delay", s.avg_delay},
                    {"local_fraction", s.local_fraction},
                    {"neighbor_fraction", s.neighbor_fraction},
                    {"cloud_fraction", s.cloud_fraction},
                    {"cumulative_reward", s.cumulative_reward}};
  doc["decisions"] = result.decisions;
  doc["train_steps"] = result.losses.size();
  doc["loss_first_decile"] = number_or_null(decile_mean(result.losses, false));
  doc["loss_last_decile"] = number_or_null(decile_mean(result.losses, true));
  doc["rounds"] = result.rounds.size();
  doc["uploaded_ratio"] =
      result.uploaded_ratio ? nlohmann::json(*result.uploaded_ratio) : nlohmann::json(nullptr);
  doc["model_checksum"] = io::hex64(result.model_checksum);
  return doc;
}

RunResult run_experiment(const SimConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  RunResult result = run_simulation(cfg);
  {
    auto out = open_out(out_dir / "metrics.csv");
    write_metrics_csv(out, result, cfg.network.num_faps, cfg.policy);
  }
  {
    auto out = open_out(out_dir / "rounds.csv");
    federation::write_rounds_csv(out, result.rounds, result.period_hit_rate);
  }
  {
    auto out = open_out(out_dir / "summary.json");
    out << summary_json(cfg, result).dump(2) << '\n';
  }
  return result;
}

SimConfig with_override(const SimConfig& cfg, const std::string& key, const nlohmann::json& value) {
  nlohmann::json doc = to_json(cfg);
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    if (!doc.contains(key) || doc[key].is_object()) throw ConfigError("unknown key '" + key + "'");
    doc[key] = value;
  } else {
    const std::string section = key.substr(0, dot);
    const std::string name = key.substr(dot + 1);
    if (!doc.contains(section) || !doc[section].is_object() || !doc[section].contains(name)) {
      throw ConfigError("unknown key '" + key + "'");
    }
    doc[section][name] = value;
  }
  return parse_config(doc);
}

std::pair<std::string, nlohmann::json> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + text + "'");
  const std::string raw = text.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  return {text.substr(0, eq), value};
}

std::vector<CompareRow> compare_policies(const SimConfig& base, std::span<const PolicyKind> policies,
                                         std::span<const std::uint64_t> seeds,
                                         const std::optional<Sweep>& sweep,
                                         const CompareProgress& progress) {
  std::vector<std::pair<std::string, SimConfig>> points;
  if (sweep) {
    for (const auto& v : sweep->values) points.emplace_back(v.dump(), with_override(base, sweep->key, v));
  } else {
    points.emplace_back("", base);
  }

  std::vector<CompareRow> rows;
  for (const auto& [label, point] : points) {
    for (const auto seed : seeds) {
      for (const auto policy : policies) {
        SimConfig cfg = point;
        cfg.seed = seed;
        cfg.policy = policy;
        cfg.validate();
        const RunResult r = run_simulation(cfg);
        CompareRow row;
        row.sweep_key = sweep ? sweep->key : "";
        row.sweep_value = label;
        row.policy = policy;
        row.seed = seed;
        row.summary = r.summary;
        row.uploaded_ratio = r.uploaded_ratio;
        if (progress) progress(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows) {
  io::CsvWriter csv(out);
  csv.header({"sweep_key", "sweep_value", "policy", "seed", "hit_rate", "avg_delay", "local_fraction",
              "neighbor_fraction", "cloud_fraction", "cumulative_reward", "uploaded_ratio"});
  for (const auto& r : rows) {
    const auto& s = r.summary;
    csv.row(r.sweep_key, r.sweep_value, policy_name(r.policy), r.seed, s.hit_rate, s.avg_delay,
            s.local_fraction, s.neighbor_fraction, s.cloud_fraction, s.cumulative_reward,
            r.uploaded_ratio.value_or(std::numeric_limits<double>::quiet_NaN()));
  }
}

std::vector<CompareMean> average_over_seeds(std::span<const CompareRow> rows) {
  std::vector<CompareMean> means;
  std::map<std::pair<std::string, PolicyKind>, std::size_t> index;
  for (const auto& r : rows) {
    auto [it, fresh] = index.try_emplace({r.sweep_value, r.policy}, means.size());
    if (fresh) means.push_back({r.sweep_value, r.policy, 0, 0.0, 0.0});
    auto& m = means[it->second];
    ++m.seeds;
    m.hit_rate += r.summary.hit_rate;
    m.avg_delay += r.summary.avg_delay;
  }
  for (auto& m : means) {
    m.hit_rate /= static_cast<double>(m.seeds);
    m.avg_delay /= static_cast<double>(m.seeds);
  }
  return means;
}

}  // namespace fogcache::simctl
