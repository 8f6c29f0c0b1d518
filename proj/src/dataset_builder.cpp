#include "tasksynth/dataset_builder.hpp"

#include <fstream>

namespace tasksynth {

JudgeFn oracle_judge() {
  return [](const std::string&, const std::string& reference, const std::string& answer) {
    return exact_match_oracle(reference, answer) ? Judgement::Correct : Judgement::Incorrect;
  };
}

namespace {

RolloutTrace solve_task(const SynthesizedTask& task, PolicyEndpoint& policy,
                        const Registry& registry, int turn_cap, const ExecLimits& exec) {
  return drive_rollout(policy, "", task.query, task.toolset, registry, turn_cap, exec);
}

}  // namespace

std::optional<AcceptedTrajectory> rollout_and_reject(const SynthesizedTask& task,
                                                     PolicyEndpoint& teacher,
                                                     const Registry& registry,
                                                     const JudgeFn& judge, int attempts,
                                                     int turn_cap, const ExecLimits& exec) {
  if (attempts < 1) throw Error("EmptySuite", "attempt count must be >= 1");
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    RolloutTrace trace;
    try {
      trace = solve_task(task, teacher, registry, turn_cap, exec);
    } catch (const Error&) {
      continue;  // endpoint errors count as failed attempts
    }
    if (judge(task.query, task.answer, trace.final_answer) != Judgement::Correct) continue;
    AcceptedTrajectory out;
    out.cycle_id = task.config.cycle_id;
    out.query = task.query;
    out.answer = task.answer;
    out.toolset = task.toolset;
    out.trace = std::move(trace);
    out.final_answer = out.trace.final_answer;
    out.judgement = Judgement::Correct;
    out.attempt = attempt;
    return out;
  }
  return std::nullopt;
}

LearnabilityEstimate estimate_learnability(const SynthesizedTask& task,
                                           PolicyEndpoint& policy, const Registry& registry,
                                           const JudgeFn& judge, int k_rl, int turn_cap,
                                           const ExecLimits& exec) {
  if (k_rl < 1) throw Error("EmptySuite", "k_rl must be >= 1");
  LearnabilityEstimate est;
  est.cycle_id = task.config.cycle_id;
  est.k_rl = k_rl;
  for (int i = 0; i < k_rl; ++i) {
    try {
      RolloutTrace trace = solve_task(task, policy, registry, turn_cap, exec);
      if (judge(task.query, task.answer, trace.final_answer) == Judgement::Correct)
        est.successes += 1;
    } catch (const Error&) {
      // per-rollout errors count as failures
    }
  }
  return est;
}

std::vector<LearnabilityEstimate> filter_frontier(
    const std::vector<LearnabilityEstimate>& estimates, int lo, int hi) {
  if (lo < 1) throw Error("EmptySuite", "frontier lower bound must be >= 1");
  for (const auto& e : estimates)
    if (hi >= e.k_rl)
      throw Error("EmptySuite", "frontier upper bound must stay below k_rl");
  std::vector<LearnabilityEstimate> out;
  for (const auto& e : estimates)
    if (e.successes >= lo && e.successes <= hi) out.push_back(e);
  return out;
}

bool has_format_violation(const RolloutTrace& trace) {
  for (const auto& s : trace.steps) {
    if (!s.observation) continue;
    if (s.observation->status != ObsStatus::ToolError) continue;
    const std::string& p = s.observation->payload;
    if (p.rfind("ArgumentMismatch:", 0) == 0 || p.rfind("UnknownTool:", 0) == 0 ||
        p.rfind("ToolNotInToolset:", 0) == 0)
      return true;
  }
  return false;
}

Reward compute_reward(const RolloutTrace& trace, const SynthesizedTask& task,
                      const JudgeFn& judge, double alpha) {
  Reward r;
  r.alpha = alpha;
  r.r_format = has_format_violation(trace) ? -1.0 : 0.0;
  r.r_correct =
      judge(task.query, task.answer, trace.final_answer) == Judgement::Correct ? 1.0 : 0.0;
  r.total = alpha * r.r_format + r.r_correct;
  return r;
}

// ---- exports ----

namespace {

json observation_to_json(const Observation& o) {
  return {{"status", to_string(o.status)}, {"payload", o.payload}};
}

void write_jsonl(const std::vector<json>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("ParseError", "cannot open '" + path + "' for writing");
  for (const auto& r : records) out << r.dump() << "\n";
}

}  // namespace

json sft_record_to_json(const AcceptedTrajectory& t) {
  json j;
  j["cycle_id"] = t.cycle_id;
  j["query"] = t.query;
  j["answer"] = t.answer;
  j["toolset"] = t.toolset;
  j["final_answer"] = t.final_answer;
  j["judgement"] = to_string(t.judgement);
  j["attempt"] = t.attempt;
  j["messages"] = messages_to_wire(t.trace.messages);
  j["steps"] = json::array();
  for (const auto& s : t.trace.steps) {
    json sj;
    sj["reasoning"] = s.reasoning;
    if (s.action)
      sj["call"] = {{"id", s.action->call_id},
                    {"tool", s.action->tool_name},
                    {"arguments", s.action->arguments}};
    if (s.observation) sj["observation"] = observation_to_json(*s.observation);
    j["steps"].push_back(std::move(sj));
  }
  return j;
}

void export_sft(const std::vector<AcceptedTrajectory>& accepted, const std::string& path) {
  std::vector<json> records;
  records.reserve(accepted.size());
  for (const auto& t : accepted) records.push_back(sft_record_to_json(t));
  write_jsonl(records, path);
}

void export_rl(const std::vector<SynthesizedTask>& tasks, const std::string& path) {
  std::vector<json> records;
  records.reserve(tasks.size());
  for (const auto& t : tasks) {
    json j;
    j["cycle_id"] = t.config.cycle_id;
    j["query"] = t.query;
    j["answer"] = t.answer;
    j["toolset"] = t.toolset;
    records.push_back(std::move(j));
  }
  write_jsonl(records, path);
}

}  // namespace tasksynth
