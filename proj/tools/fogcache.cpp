// fogcache command-line driver.
//
//   fogcache run      [--config f] [--seed s] [--policy p] [--keep r] [--clusters k] [--set sec.key=v]... [--out dir]
//   fogcache compare  [--config f] [--policies a,b] [--seeds 0,1] [--sweep sec.key=v1,v2] [--out dir]
//   fogcache theorems [--seed s] [--steps T] [--replicas R] [--out dir]
//
// Exit codes: 0 ok, 1 other failure, 2 configuration error, 3 invariant violation.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fogcache/convergence/testbed.hpp"
#include "fogcache/env/world.hpp"
#include "fogcache/simctl/config.hpp"
#include "fogcache/simctl/experiment.hpp"

namespace fs = std::filesystem;
using namespace fogcache;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<double> keep;
  std::optional<std::size_t> clusters;
  std::vector<std::string> sets;
  std::string out = "out";
};

simctl::SimConfig build_config(const RunArgs& a) {
  simctl::SimConfig cfg = a.config.empty() ? simctl::SimConfig{} : simctl::load_config(a.config);
  for (const auto& s : a.sets) {
    auto [key, value] = simctl::parse_assignment(s);
    cfg = simctl::with_override(cfg, key, value);
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.policy) cfg.policy = simctl::parse_policy(*a.policy);
  if (a.keep) cfg.federation.keep_fraction = *a.keep;
  if (a.clusters) cfg.federation.clusters = *a.clusters;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "JSON config file");
  cmd->add_option("--seed", a.seed, "master seed");
  cmd->add_option("--policy", a.policy, "dqn|frlq|frl|centralized|lru|lfu");
  cmd->add_option("--keep", a.keep, "federated keep fraction");
  cmd->add_option("--clusters", a.clusters, "k-means clusters per kept layer");
  cmd->add_option("--set", a.sets, "override, section.key=<json>");
  cmd->add_option("--out", a.out, "output directory");
}

int cmd_run(const RunArgs& a) {
  const auto cfg = build_config(a);
  const auto r = simctl::run_experiment(cfg, a.out);
  std::printf("%s seed %llu: hit %.4f delay %.6f s reward %.6g", std::string(simctl::policy_name(cfg.policy)).c_str(),
              static_cast<unsigned long long>(cfg.seed), r.summary.hit_rate, r.summary.avg_delay,
              r.summary.cumulative_reward);
  if (r.uploaded_ratio) std::printf(" uploaded %.4f", *r.uploaded_ratio);
  std::printf("\n");
  return 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int cmd_compare(const RunArgs& a, const std::string& policies, const std::string& seeds,
                const std::string& sweep_text) {
  const auto cfg = build_config(a);
  std::vector<simctl::PolicyKind> kinds;
  for (const auto& p : split(policies, ',')) kinds.push_back(simctl::parse_policy(p));
  std::vector<std::uint64_t> seed_list;
  for (const auto& s : split(seeds, ',')) {
    try {
      seed_list.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw simctl::ConfigError("bad seed '" + s + "'");
    }
  }
  std::optional<simctl::Sweep> sweep;
  if (!sweep_text.empty()) {
    auto [key, first] = simctl::parse_assignment(sweep_text);
    simctl::Sweep sw{key, {}};
    for (const auto& v : split(sweep_text.substr(sweep_text.find('=') + 1), ',')) {
      sw.values.push_back(simctl::parse_assignment(key + "=" + v).second);
    }
    sweep = std::move(sw);
  }
  const auto rows = simctl::compare_policies(cfg, kinds, seed_list, sweep, [](const simctl::CompareRow& r) {
    std::fprintf(stderr, "%s%s%-12s seed %llu hit %.4f delay %.6f\n", r.sweep_value.c_str(),
                 r.sweep_value.empty() ? "" : " ", std::string(simctl::policy_name(r.policy)).c_str(),
                 static_cast<unsigned long long>(r.seed), r.summary.hit_rate, r.summary.avg_delay);
  });
  fs::create_directories(a.out);
  std::ofstream out(fs::path(a.out) / "compare.csv");
  simctl::write_compare_csv(out, rows);
  for (const auto& m : simctl::average_over_seeds(rows)) {
    std::printf("%s%s%-12s hit %.4f delay %.6f (%zu seeds)\n", m.sweep_value.c_str(),
                m.sweep_value.empty() ? "" : " ", std::string(simctl::policy_name(m.policy)).c_str(), m.hit_rate,
                m.avg_delay, m.seeds);
  }
  return 0;
}

int cmd_theorems(std::uint64_t seed, std::size_t steps, std::size_t replicas, const std::string& out_dir) {
  const auto cases = convergence::standard_sweep(seed, steps, replicas);
  std::vector<convergence::SweepResult> results;
  bool all = true;
  for (const auto& c : cases) {
    convergence::SweepResult r;
    r.instance = &c;
    r.trace = convergence::run_fedsgd(c.problem, c.options);
    r.theorem1 = convergence::check_theorem1(r.trace);
    r.theorem2 = convergence::check_theorem2(r.trace);
    all = all && r.theorem1.all() && r.theorem2.all();
    std::printf("N=%-2zu X=%-2zu H=%-10.4g rho=%-10.4g step bound: %zu violations, decay bound: %zu violations\n",
                c.spec.clients, c.options.local_steps, r.trace.H, r.trace.rho, r.theorem1.violations,
                r.theorem2.violations);
    results.push_back(std::move(r));
  }
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "theorems.csv");
  convergence::write_sweep_csv(out, results);
  std::printf("%s\n", all ? "both bounds hold on every instance" : "bound violated");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated edge-caching simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "simulate one policy and write metrics.csv, rounds.csv, summary.json");
  add_common(run, run_args);

  RunArgs cmp_args;
  std::string policies = "lru,lfu,dqn,frlq";
  std::string seeds = "0";
  std::string sweep;
  auto* compare = app.add_subcommand("compare", "run several policies on common request traces");
  add_common(compare, cmp_args);
  compare->add_option("--policies", policies, "comma-separated policies");
  compare->add_option("--seeds", seeds, "comma-separated seeds");
  compare->add_option("--sweep", sweep, "section.key=v1,v2,...");

  std::uint64_t th_seed = 0;
  std::size_t th_steps = 200;
  std::size_t th_replicas = 200;
  std::string th_out = "out";
  auto* theorems = app.add_subcommand("theorems", "check both convergence bounds on the quadratic testbed");
  theorems->add_option("--seed", th_seed, "instance and noise seed");
  theorems->add_option("--steps", th_steps, "steps per instance");
  theorems->add_option("--replicas", th_replicas, "noise replicas");
  theorems->add_option("--out", th_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*compare) return cmd_compare(cmp_args, policies, seeds, sweep);
    return cmd_theorems(th_seed, th_steps, th_replicas, th_out);
  } catch (const simctl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const env::CacheError& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kExitInvariant;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
