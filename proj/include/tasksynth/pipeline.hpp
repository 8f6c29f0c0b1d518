#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tasksynth/dataset_builder.hpp"
#include "tasksynth/diversity_analyzer.hpp"
#include "tasksynth/resource_pools.hpp"
#include "tasksynth/scripted.hpp"
#include "tasksynth/synthesis_engine.hpp"

namespace tasksynth {

struct RunConfig {
  std::string manifest_path;
  std::string seeds_path;
  std::string exemplars_path;
  std::string out_dir = "out";

  int cycles = 10;
  int iterations = 3;  // collection/derivation rounds per cycle
  int t_max = 6;       // tool-call budget per collection round
  SamplingBounds bounds;

  int sft_attempts = 1;
  int k_rl = 8;
  int frontier_lo = 1;
  int frontier_hi = 5;
  double alpha = 0.1;
  int turn_cap = 50;

  std::uint64_t global_seed = 0;
  int workers = 1;

  // "scripted" runs entirely offline on the builtin mock policies; "remote"
  // talks to a chat-completions endpoint.
  std::string mode = "scripted";
  std::string base_url;
  std::string model;
  std::string api_key_env = "POLICY_API_KEY";
};

RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::string& path);
json run_config_to_json(const RunConfig& cfg);

/// Fresh collector/generator endpoints per worker thread.
using EndpointPairFactory = std::function<CycleEndpoints()>;

/// Holds the endpoints a CycleEndpoints view points into.
struct OwnedEndpoints {
  std::unique_ptr<PolicyEndpoint> collector;
  std::unique_ptr<PolicyEndpoint> generator;
  CycleEndpoints view() const { return {collector.get(), generator.get()}; }
};

OwnedEndpoints make_endpoints(const RunConfig& cfg);

struct SynthesisRunStats {
  int requested = 0;
  int completed = 0;
  int skipped_existing = 0;
  int failed = 0;
};

/// Runs `cfg.cycles` synthesis cycles against the registry and pools, writing
/// tasks to <out_dir>/tasks.jsonl. Records commit in cycle-index order and
/// flush per record; cycles already present in the store are skipped, so the
/// store itself is the resume cursor. Deterministic in the worker count: every
/// cycle draws from its own derived seed.
SynthesisRunStats run_synthesis(const RunConfig& cfg, const Registry& registry,
                                const SeedPool& seeds, const ExemplarPool& exemplars,
                                const EndpointPairFactory& factory);

std::vector<SynthesizedTask> load_task_store(const std::string& path);

// ---- command helpers ----

struct ValidationSummary {
  int robust = 0;
  int rejected = 0;
  std::vector<ValidationReport> reports;
};

/// Smoke-validates every tool in the registry with a schema-derived case.
ValidationSummary validate_registry(const Registry& registry, int fanout = 8,
                                    int repeats = 4, const ExecLimits& limits = {});

struct VerifySummary {
  int total = 0;
  int replay_ok = 0;
  int confined = 0;  // tasks whose evidence only uses toolset members
};

VerifySummary verify_store(const std::vector<SynthesizedTask>& tasks,
                           const Registry& registry, const ExecLimits& limits = {});

struct SftSummary {
  int tasks = 0;
  int accepted = 0;
};

SftSummary build_sft(const std::vector<SynthesizedTask>& tasks, PolicyEndpoint& teacher,
                     const Registry& registry, const JudgeFn& judge,
                     const std::string& out_path, int attempts, int turn_cap,
                     const ExecLimits& exec = {});

struct RlSummary {
  int tasks = 0;
  int kept = 0;
};

RlSummary build_rl(const std::vector<SynthesizedTask>& tasks, PolicyEndpoint& policy,
                   const Registry& registry, const JudgeFn& judge,
                   const std::string& out_path, int k_rl, int lo, int hi, int turn_cap,
                   const ExecLimits& exec = {});

DiversityReport analyze_store(const std::vector<SynthesizedTask>& tasks,
                              const Registry& registry);

}  // namespace tasksynth
