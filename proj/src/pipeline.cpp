#include "tasksynth/pipeline.hpp"

#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

namespace tasksynth {

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  read_field(j, "manifest", cfg.manifest_path);
  read_field(j, "seeds", cfg.seeds_path);
  read_field(j, "exemplars", cfg.exemplars_path);
  read_field(j, "out_dir", cfg.out_dir);
  read_field(j, "cycles", cfg.cycles);
  read_field(j, "iterations", cfg.iterations);
  read_field(j, "t_max", cfg.t_max);
  read_field(j, "toolset_lo", cfg.bounds.toolset_lo);
  read_field(j, "toolset_hi", cfg.bounds.toolset_hi);
  read_field(j, "exemplars_lo", cfg.bounds.exemplars_lo);
  read_field(j, "exemplars_hi", cfg.bounds.exemplars_hi);
  read_field(j, "sft_attempts", cfg.sft_attempts);
  read_field(j, "k_rl", cfg.k_rl);
  read_field(j, "frontier_lo", cfg.frontier_lo);
  read_field(j, "frontier_hi", cfg.frontier_hi);
  read_field(j, "alpha", cfg.alpha);
  read_field(j, "turn_cap", cfg.turn_cap);
  read_field(j, "seed", cfg.global_seed);
  read_field(j, "workers", cfg.workers);
  read_field(j, "mode", cfg.mode);
  read_field(j, "base_url", cfg.base_url);
  read_field(j, "model", cfg.model);
  read_field(j, "api_key_env", cfg.api_key_env);
  if (cfg.mode != "scripted" && cfg.mode != "remote")
    throw Error("ParseError", "mode must be 'scripted' or 'remote'");
  if (cfg.cycles < 0 || cfg.iterations < 1 || cfg.t_max < 1 || cfg.workers < 1)
    throw Error("ParseError", "cycles/iterations/t_max/workers out of range");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("ParseError", "cannot open run config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("ParseError", "run config '" + path + "': " + e.what());
  }
  return run_config_from_json(j);
}

json run_config_to_json(const RunConfig& cfg) {
  return {{"manifest", cfg.manifest_path},
          {"seeds", cfg.seeds_path},
          {"exemplars", cfg.exemplars_path},
          {"out_dir", cfg.out_dir},
          {"cycles", cfg.cycles},
          {"iterations", cfg.iterations},
          {"t_max", cfg.t_max},
          {"toolset_lo", cfg.bounds.toolset_lo},
          {"toolset_hi", cfg.bounds.toolset_hi},
          {"exemplars_lo", cfg.bounds.exemplars_lo},
          {"exemplars_hi", cfg.bounds.exemplars_hi},
          {"sft_attempts", cfg.sft_attempts},
          {"k_rl", cfg.k_rl},
          {"frontier_lo", cfg.frontier_lo},
          {"frontier_hi", cfg.frontier_hi},
          {"alpha", cfg.alpha},
          {"turn_cap", cfg.turn_cap},
          {"seed", cfg.global_seed},
          {"workers", cfg.workers},
          {"mode", cfg.mode},
          {"base_url", cfg.base_url},
          {"model", cfg.model},
          {"api_key_env", cfg.api_key_env}};
}

OwnedEndpoints make_endpoints(const RunConfig& cfg) {
  OwnedEndpoints out;
  if (cfg.mode == "scripted") {
    out.collector = make_scripted_collector();
    out.generator = make_scripted_generator();
  } else {
    out.collector = std::make_unique<RemoteEndpoint>(cfg.base_url, cfg.model, cfg.api_key_env);
    out.generator = std::make_unique<RemoteEndpoint>(cfg.base_url, cfg.model, cfg.api_key_env);
  }
  return out;
}

std::vector<SynthesizedTask> load_task_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("ParseError", "cannot open task store '" + path + "'");
  std::vector<SynthesizedTask> tasks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      tasks.push_back(task_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error("ParseError", path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return tasks;
}

SynthesisRunStats run_synthesis(const RunConfig& cfg, const Registry& registry,
                                const SeedPool& seeds, const ExemplarPool& exemplars,
                                const EndpointPairFactory& factory) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string store_path = cfg.out_dir + "/tasks.jsonl";

  std::set<std::uint64_t> existing;
  if (std::filesystem::exists(store_path))
    for (const auto& t : load_task_store(store_path)) existing.insert(t.cycle_index);

  std::vector<std::uint64_t> pending;
  for (int i = 0; i < cfg.cycles; ++i)
    if (!existing.count(static_cast<std::uint64_t>(i)))
      pending.push_back(static_cast<std::uint64_t>(i));

  SynthesisRunStats stats;
  stats.requested = cfg.cycles;
  stats.skipped_existing = cfg.cycles - static_cast<int>(pending.size());
  if (pending.empty()) return stats;

  std::ofstream out(store_path, std::ios::binary | std::ios::app);
  if (!out) throw Error("ParseError", "cannot open '" + store_path + "' for append");

  CycleLimits limits;
  limits.t_max = cfg.t_max;

  std::mutex mu;
  std::condition_variable cv;
  std::size_t next_claim = 0;
  // slot -> serialized record, or nullopt when the cycle failed
  std::map<std::size_t, std::optional<std::string>> ready;
  std::vector<std::string> failures;

  auto worker = [&] {
    OwnedEndpoints owned;
    CycleEndpoints endpoints;
    {
      std::lock_guard<std::mutex> lock(mu);
      if (factory) {
        endpoints = factory();
      } else {
        owned = make_endpoints(cfg);
        endpoints = owned.view();
      }
    }
    for (;;) {
      std::size_t slot;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next_claim >= pending.size()) return;
        slot = next_claim++;
      }
      std::uint64_t index = pending[slot];
      std::optional<std::string> record;
      std::string failure;
      try {
        Rng rng(derive_seed(cfg.global_seed, index));
        SynthesisConfig config =
            sample_config(seeds, exemplars, registry, cfg.bounds, rng);
        config.rng_seed = derive_seed(cfg.global_seed, index);
        config.cycle_id = "cycle-" + std::to_string(index);
        SynthesizedTask task = run_cycle(config, cfg.iterations, endpoints, registry, limits);
        task.cycle_index = index;
        record = task_to_json(task).dump();
      } catch (const std::exception& e) {
        failure = "cycle-" + std::to_string(index) + ": " + e.what();
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        ready[slot] = std::move(record);
        if (!failure.empty()) failures.push_back(std::move(failure));
      }
      cv.notify_one();
    }
  };

  int n_workers = std::min<int>(cfg.workers, static_cast<int>(pending.size()));
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);

  // Commit in slot order so the store layout is independent of thread timing.
  std::size_t next_commit = 0;
  {
    std::unique_lock<std::mutex> lock(mu);
    while (next_commit < pending.size()) {
      cv.wait(lock, [&] { return ready.count(next_commit) > 0; });
      auto node = ready.extract(next_commit);
      ++next_commit;
      if (node.mapped()) {
        lock.unlock();
        out << *node.mapped() << "\n";
        out.flush();
        lock.lock();
        stats.completed += 1;
      } else {
        stats.failed += 1;
      }
    }
  }
  for (auto& t : threads) t.join();
  return stats;
}

// ---- command helpers ----

namespace {

json smoke_arguments(const ToolSpec& spec) {
  json args = json::object();
  for (const auto& p : spec.parameters) {
    if (!p.required) continue;
    if (p.type == "string") args[p.name] = "probe " + spec.name;
    else if (p.type == "number" || p.type == "integer") args[p.name] = 3;
    else if (p.type == "boolean") args[p.name] = true;
  }
  return args;
}

}  // namespace

ValidationSummary validate_registry(const Registry& registry, int fanout, int repeats,
                                    const ExecLimits& limits) {
  ValidationSummary summary;
  for (const auto& spec : registry.tools()) {
    ValidationCase c;
    c.arguments = smoke_arguments(spec);
    c.description = "schema-derived smoke case";
    c.expect = [](const Observation& o) {
      return o.status == ObsStatus::Ok && !o.payload.empty();
    };
    ValidationReport report = validate_tool(registry, spec.name, {c}, fanout, repeats, limits);
    if (report.verdict == ValidationReport::Verdict::Robust) summary.robust += 1;
    else summary.rejected += 1;
    summary.reports.push_back(std::move(report));
  }
  return summary;
}

VerifySummary verify_store(const std::vector<SynthesizedTask>& tasks,
                           const Registry& registry, const ExecLimits& limits) {
  VerifySummary summary;
  summary.total = static_cast<int>(tasks.size());
  for (const auto& task : tasks) {
    if (replay_evidence(task, registry, limits)) summary.replay_ok += 1;
    bool confined = true;
    for (const auto& item : task.evidence.items) {
      bool member = false;
      for (const auto& name : task.toolset)
        if (name == item.action.tool_name) { member = true; break; }
      if (!member) { confined = false; break; }
    }
    if (confined) summary.confined += 1;
  }
  return summary;
}

SftSummary build_sft(const std::vector<SynthesizedTask>& tasks, PolicyEndpoint& teacher,
                     const Registry& registry, const JudgeFn& judge,
                     const std::string& out_path, int attempts, int turn_cap,
                     const ExecLimits& exec) {
  SftSummary summary;
  summary.tasks = static_cast<int>(tasks.size());
  std::vector<AcceptedTrajectory> accepted;
  for (const auto& task : tasks) {
    auto result = rollout_and_reject(task, teacher, registry, judge, attempts, turn_cap, exec);
    if (result) accepted.push_back(std::move(*result));
  }
  summary.accepted = static_cast<int>(accepted.size());
  export_sft(accepted, out_path);
  return summary;
}

RlSummary build_rl(const std::vector<SynthesizedTask>& tasks, PolicyEndpoint& policy,
                   const Registry& registry, const JudgeFn& judge,
                   const std::string& out_path, int k_rl, int lo, int hi, int turn_cap,
                   const ExecLimits& exec) {
  RlSummary summary;
  summary.tasks = static_cast<int>(tasks.size());
  std::vector<LearnabilityEstimate> estimates;
  estimates.reserve(tasks.size());
  for (const auto& task : tasks)
    estimates.push_back(
        estimate_learnability(task, policy, registry, judge, k_rl, turn_cap, exec));
  filter_frontier(estimates, lo, hi);  // validates the bounds against every estimate
  std::vector<SynthesizedTask> kept;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (estimates[i].successes >= lo && estimates[i].successes <= hi)
      kept.push_back(tasks[i]);
  summary.kept = static_cast<int>(kept.size());
  export_rl(kept, out_path);
  return summary;
}

DiversityReport analyze_store(const std::vector<SynthesizedTask>& tasks,
                              const Registry& registry) {
  std::vector<TraceRecord> records;
  records.reserve(tasks.size());
  for (const auto& t : tasks) records.push_back(record_from_task(t));
  return analyze_corpus(records, registry);
}

}  // namespace tasksynth
