#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include "tasksynth/policy_client.hpp"
#include "tasksynth/resource_pools.hpp"
#include "tasksynth/tool_registry.hpp"

namespace tasksynth {

// Deterministic scripted policies for offline pipelines and tests. All of
// them are pure functions of (message history, declared toolset), so whole
// synthesis runs replay bit-for-bit.

/// Research agent: emits `calls_per_round` tool calls chosen by hashing the
/// topic, chaining tokens from earlier observations into later arguments,
/// then finishes with a short summary.
std::unique_ptr<PolicyEndpoint> make_scripted_collector(int calls_per_round = 3);

/// Task generator: parses the derivation prompt and emits the labeled
/// QUERY/ANSWER/REASONING (or EVOLVED_*) grammar, grounding the answer in
/// the last evidence line.
std::unique_ptr<PolicyEndpoint> make_scripted_generator();

/// Solver: optionally performs a few tool calls, then answers with
/// `answer_for(query)` where query is the first user message.
std::unique_ptr<PolicyEndpoint> make_scripted_solver(
    std::function<std::string(const std::string& query)> answer_for,
    int calls_before_answer = 1);

/// Verifier: judges with the exact-match oracle and emits the
/// JUDGEMENT/EXPLANATION grammar. Parses the verification prompt slots.
std::unique_ptr<PolicyEndpoint> make_scripted_verifier();

/// Stateful wrapper for self-sampling simulations: the callback additionally
/// sees a 1-based attempt counter that advances on every finished rollout.
class AttemptScriptedEndpoint : public PolicyEndpoint {
 public:
  using Fn = std::function<AssistantTurn(int attempt, const std::vector<ChatMessage>&,
                                         const std::vector<const ToolSpec*>&)>;
  explicit AttemptScriptedEndpoint(Fn fn) : fn_(std::move(fn)) {}
  AssistantTurn complete(const std::vector<ChatMessage>& messages,
                         const std::vector<const ToolSpec*>& tools) override {
    // A fresh rollout starts when the history holds exactly one user message
    // and no assistant turns yet.
    bool fresh = true;
    for (const auto& m : messages)
      if (m.role == Role::Assistant) fresh = false;
    if (fresh) attempt_.fetch_add(1);
    return fn_(attempt_.load(), messages, tools);
  }

 private:
  Fn fn_;
  std::atomic<int> attempt_{0};
};

// ---- demo fixtures ----

/// A registry of deterministic mock-backed tools across all five domains,
/// `per_domain` tools each plus a handful of General ones.
Registry make_demo_registry(int per_domain = 20);
SeedPool make_demo_seed_pool(int per_domain = 10);
ExemplarPool make_demo_exemplar_pool(int count = 12);

void write_demo_fixtures(const std::string& dir, int tools_per_domain = 20,
                         int seeds_per_domain = 10, int exemplar_count = 12);

}  // namespace tasksynth
