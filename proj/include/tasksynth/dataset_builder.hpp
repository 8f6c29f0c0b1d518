#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tasksynth/synthesis_engine.hpp"
#include "tasksynth/verification.hpp"

namespace tasksynth {

/// Judges a final answer against the reference. Remote pipelines wrap
/// cross_verify; mock pipelines use the exact-match oracle.
using JudgeFn = std::function<Judgement(const std::string& query, const std::string& reference,
                                        const std::string& answer)>;

JudgeFn oracle_judge();

struct AcceptedTrajectory {
  std::string cycle_id;  // task ref
  std::string query;
  std::string answer;
  std::vector<std::string> toolset;
  RolloutTrace trace;
  std::string final_answer;
  Judgement judgement = Judgement::Correct;
  int attempt = 1;  // 1-based index of the first verified-correct attempt
};

struct LearnabilityEstimate {
  std::string cycle_id;
  int successes = 0;
  int k_rl = 0;
};

struct Reward {
  double r_format = 0.0;  // 0 or -1, clamped
  double r_correct = 0.0;
  double alpha = 0.1;
  double total = 0.0;     // alpha * r_format + r_correct
};

std::optional<AcceptedTrajectory> rollout_and_reject(const SynthesizedTask& task,
                                                     PolicyEndpoint& teacher,
                                                     const Registry& registry,
                                                     const JudgeFn& judge, int attempts = 1,
                                                     int turn_cap = 50,
                                                     const ExecLimits& exec = {});

LearnabilityEstimate estimate_learnability(const SynthesizedTask& task,
                                           PolicyEndpoint& policy, const Registry& registry,
                                           const JudgeFn& judge, int k_rl = 8,
                                           int turn_cap = 50, const ExecLimits& exec = {});

/// Keeps exactly the estimates with lo <= successes <= hi, order-preserving.
/// Preconditions: lo >= 1 and hi < k_rl of every estimate.
std::vector<LearnabilityEstimate> filter_frontier(
    const std::vector<LearnabilityEstimate>& estimates, int lo = 1, int hi = 5);

Reward compute_reward(const RolloutTrace& trace, const SynthesizedTask& task,
                      const JudgeFn& judge, double alpha = 0.1);

/// True when the trace contains a tool call that failed to parse or validate
/// against its schema (the format penalty trigger).
bool has_format_violation(const RolloutTrace& trace);

json sft_record_to_json(const AcceptedTrajectory& t);
void export_sft(const std::vector<AcceptedTrajectory>& accepted, const std::string& path);
void export_rl(const std::vector<SynthesizedTask>& tasks, const std::string& path);

}  // namespace tasksynth
