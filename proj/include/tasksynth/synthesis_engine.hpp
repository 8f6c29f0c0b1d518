#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tasksynth/policy_client.hpp"
#include "tasksynth/resource_pools.hpp"
#include "tasksynth/tool_registry.hpp"

namespace tasksynth {

struct EvidenceItem {
  ToolCall action;
  Observation observation;  // always status Ok
  int round = 0;
  int step = 0;
};

/// Append-only across rounds; rounds are non-decreasing along the list.
struct EvidenceSet {
  std::vector<EvidenceItem> items;
};

struct RolloutStep {
  std::string reasoning;
  std::optional<ToolCall> action;       // nullopt on the finishing turn
  std::optional<Observation> observation;
};

struct RolloutTrace {
  std::vector<RolloutStep> steps;
  std::vector<ChatMessage> messages;  // full message-level transcript
  int budget_used = 0;                // executed tool calls
  std::string final_answer;
};

struct DerivedTask {
  std::string query;
  std::string answer;
  std::string reasoning;
  int round = 0;
};

struct SynthesizedTask {
  std::string query;
  std::string answer;
  std::vector<std::string> toolset;  // byte-identical to the config's toolset
  EvidenceSet evidence;
  SynthesisConfig config;
  std::vector<DerivedTask> history;
  std::uint64_t cycle_index = 0;
};

struct CycleEndpoints {
  PolicyEndpoint* collector = nullptr;
  PolicyEndpoint* generator = nullptr;
};

struct CycleLimits {
  int t_max = 6;
  ExecLimits exec;
  std::size_t digest_item_cap = 2048;  // per-item payload cap in digests
};

// ---- prompts ----

std::string render_collection_prompt(int round, const std::string& topic, Domain domain,
                                     const std::string& evidence_digest, int t_max);
std::string render_derivation_prompt(int round, const std::vector<Exemplar>& exemplars,
                                     const std::string& topic,
                                     const std::string& evidence_digest);

/// "toolname(args) -> payload" per item, oldest first, duplicates dropped,
/// payloads capped per item.
std::string evidence_digest(const EvidenceSet& evidence, std::size_t item_cap = 2048);

DerivedTask parse_derivation_output(const std::string& text, int round);

// ---- loop ----

struct CollectionResult {
  EvidenceSet evidence;  // E_k = E_{k-1} ++ Ok pairs of this rollout
  RolloutTrace trace;
};

CollectionResult collect_evidence(const SynthesisConfig& config, int round,
                                  const std::string& query, const EvidenceSet& prior,
                                  PolicyEndpoint& collector, const Registry& registry,
                                  const CycleLimits& limits);

SynthesizedTask run_cycle(const SynthesisConfig& config, int iterations,
                          const CycleEndpoints& endpoints, const Registry& registry,
                          const CycleLimits& limits = {});

// ---- task store serialization ----

json task_to_json(const SynthesizedTask& task);
SynthesizedTask task_from_json(const json& j);

/// Re-executes every evidence action against the registry and checks the
/// stored observations byte-for-byte.
bool replay_evidence(const SynthesizedTask& task, const Registry& registry,
                     const ExecLimits& limits = {});

/// Generic multi-turn rollout driver shared with the dataset builder: sends
/// `user_text` under the declared toolset, executes emitted calls, feeds the
/// observations back, and stops at a finished turn or after `t_max` calls.
RolloutTrace drive_rollout(PolicyEndpoint& policy, const std::string& system_text,
                           const std::string& user_text,
                           const std::vector<std::string>& toolset,
                           const Registry& registry, int t_max,
                           const ExecLimits& exec = {});

}  // namespace tasksynth
