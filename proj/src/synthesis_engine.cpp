#include "tasksynth/synthesis_engine.hpp"

#include <set>
#include <sstream>

namespace tasksynth {

// ---- prompts ----

std::string render_collection_prompt(int round, const std::string& topic, Domain domain,
                                     const std::string& evidence_digest, int t_max) {
  if (round < 1) throw Error("MissingDigest", "round must be >= 1");
  std::ostringstream os;
  if (round == 1) {
    os << "Research \"" << topic << "\" in " << to_string(domain)
       << " domain. Use multiple tools to retrieve and process comprehensive and "
          "verifiable information from various sources.\n"
       << "Step budget: " << t_max << "\n\n"
       << "Note: Investigate the topic from multiple angles and explore its connections "
          "to related entities or concepts.\n\n"
       << "Strategy: If direct search has limited results, try related concepts, broader "
          "categories, or alternative terms. Consider how the different aspects of the "
          "topic relate to each other.";
  } else {
    if (evidence_digest.empty())
      throw Error("MissingDigest", "rounds past the first need an evidence digest");
    os << "Continue research on \"" << topic << "\" in " << to_string(domain) << " domain.\n"
       << "Step budget: " << t_max << "\n\n"
       << "Previous findings:\n"
       << evidence_digest << "\n\n"
       << "Based on previous findings, expand the research to broader or deeper aspects. "
          "Use diverse tools to retrieve and process new information. "
          "Avoid repeating previous findings.";
  }
  return os.str();
}

std::string render_derivation_prompt(int round, const std::vector<Exemplar>& exemplars,
                                     const std::string& topic,
                                     const std::string& evidence_digest) {
  if (round < 1) throw Error("MissingDigest", "round must be >= 1");
  std::ostringstream os;
  os << "Exemplars:\n";
  int i = 1;
  for (const auto& e : exemplars) os << i++ << ". " << e.query_text << "\n";
  os << "\n";
  if (round == 1) {
    os << "Seed: " << topic << "\n"
       << "Evidence collected: " << evidence_digest << "\n\n"
       << "Derive a specific and realistic query using the collected data. "
          "Base the answer on actual tool results only.\n\n"
       << "QUERY: [specific query grounded in evidence]\n"
       << "ANSWER: [concise factual answer from tool results only - no explanations, no "
          "reasoning, just the key values/facts]\n"
       << "REASONING: [how the evidence supports this query-answer pair]";
  } else {
    os << "Current: " << topic << "\n"
       << "Evidence collected: " << evidence_digest << "\n\n"
       << "Refine the question to be more challenging, specific and realistic using the "
          "diverse collected data. Base answer on actual tool results only.\n\n"
       << "EVOLVED_QUERY: [more complex question using collected data]\n"
       << "EVOLVED_ANSWER: [brief, factual answer from tool results - be concise, "
          "specific to the question]\n"
       << "REASONING: [what complexity was added]";
  }
  return os.str();
}

std::string evidence_digest(const EvidenceSet& evidence, std::size_t item_cap) {
  std::ostringstream os;
  std::set<std::string> seen;
  bool first = true;
  for (const auto& item : evidence.items) {
    std::string payload = item.observation.payload;
    if (payload.size() > item_cap) {
      payload.resize(item_cap);
      payload += kTruncationMarker;
    }
    std::string line = item.action.tool_name + "(" + item.action.arguments.dump() +
                       ") -> " + payload;
    if (!seen.insert(line).second) continue;  // dedup only in digests
    if (!first) os << "\n";
    os << "- " << line;
    first = false;
  }
  return os.str();
}

// ---- derivation parsing ----

namespace {

struct LabelHit {
  std::size_t line_index;
  std::string rest;  // text on the label line after the colon
};

std::optional<LabelHit> find_label(const std::vector<std::string>& lines,
                                   const std::string& label) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string t = trim(lines[i]);
    if (t.rfind(label, 0) == 0)
      return LabelHit{i, trim(t.substr(label.size()))};
  }
  return std::nullopt;
}

bool is_any_label(const std::string& line, const std::vector<std::string>& labels) {
  std::string t = trim(line);
  for (const auto& l : labels)
    if (t.rfind(l, 0) == 0) return true;
  return false;
}

std::string extract_field(const std::vector<std::string>& lines, const LabelHit& hit,
                          const std::vector<std::string>& all_labels) {
  std::string body = hit.rest;
  for (std::size_t i = hit.line_index + 1; i < lines.size(); ++i) {
    if (is_any_label(lines[i], all_labels)) break;
    body += "\n" + lines[i];
  }
  return trim(body);
}

}  // namespace

DerivedTask parse_derivation_output(const std::string& text, int round) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);

  const std::string q_label = round == 1 ? "QUERY:" : "EVOLVED_QUERY:";
  const std::string a_label = round == 1 ? "ANSWER:" : "EVOLVED_ANSWER:";
  const std::string r_label = "REASONING:";
  const std::vector<std::string> all = {q_label, a_label, r_label};

  DerivedTask task;
  task.round = round;
  auto grab = [&](const std::string& label) {
    auto hit = find_label(lines, label);
    if (!hit)
      throw Error("MissingField", "no '" + label.substr(0, label.size() - 1) + "' field");
    std::string body = extract_field(lines, *hit, all);
    if (body.empty())
      throw Error("MissingField",
                  "'" + label.substr(0, label.size() - 1) + "' field is empty");
    return body;
  };
  task.query = grab(q_label);
  task.answer = grab(a_label);
  task.reasoning = grab(r_label);
  return task;
}

// ---- rollout driver ----

RolloutTrace drive_rollout(PolicyEndpoint& policy, const std::string& system_text,
                           const std::string& user_text,
                           const std::vector<std::string>& toolset,
                           const Registry& registry, int t_max, const ExecLimits& exec) {
  std::vector<ChatMessage> messages;
  if (!system_text.empty()) messages.push_back({Role::System, system_text, {}, {}});
  messages.push_back({Role::User, user_text, {}, {}});
  std::set<std::string> allowed(toolset.begin(), toolset.end());

  RolloutTrace trace;
  while (trace.budget_used < t_max) {
    AssistantTurn turn = chat(policy, messages, toolset, registry);
    ChatMessage am{Role::Assistant, turn.reasoning_text, turn.tool_calls, {}};
    messages.push_back(am);
    if (turn.finished()) {
      trace.steps.push_back({turn.reasoning_text, std::nullopt, std::nullopt});
      trace.final_answer = turn.reasoning_text;
      trace.messages = messages;
      return trace;
    }
    bool truncated = false;
    for (std::size_t i = 0; i < turn.tool_calls.size(); ++i) {
      if (trace.budget_used >= t_max) { truncated = true; break; }
      const ToolCall& call = turn.tool_calls[i];
      Observation obs;
      if (!allowed.count(call.tool_name)) {
        obs.call_id = call.call_id;
        obs.status = ObsStatus::ToolError;
        obs.payload = "ToolNotInToolset: '" + call.tool_name +
                      "' is not part of the declared toolset";
      } else {
        obs = execute_tool(call, registry, exec);
      }
      trace.budget_used += 1;
      trace.steps.push_back({i == 0 ? turn.reasoning_text : std::string(), call, obs});
      messages.push_back({Role::ToolResult, obs.payload, {}, call.call_id});
    }
    if (truncated) break;
  }
  trace.messages = messages;
  return trace;  // budget exhausted
}

// ---- evidence collection ----

CollectionResult collect_evidence(const SynthesisConfig& config, int round,
                                  const std::string& query, const EvidenceSet& prior,
                                  PolicyEndpoint& collector, const Registry& registry,
                                  const CycleLimits& limits) {
  std::string digest =
      round > 1 ? evidence_digest(prior, limits.digest_item_cap) : std::string();
  std::string prompt =
      render_collection_prompt(round, query, config.seed.domain, digest, limits.t_max);
  RolloutTrace trace = drive_rollout(collector, "", prompt, config.toolset, registry,
                                     limits.t_max, limits.exec);
  CollectionResult result;
  result.evidence = prior;
  int step = 0;
  for (const auto& s : trace.steps) {
    if (!s.action) continue;
    ++step;
    if (s.observation && s.observation->status == ObsStatus::Ok)
      result.evidence.items.push_back({*s.action, *s.observation, round, step});
  }
  result.trace = std::move(trace);
  return result;
}

// ---- the K-round cycle ----

SynthesizedTask run_cycle(const SynthesisConfig& config, int iterations,
                          const CycleEndpoints& endpoints, const Registry& registry,
                          const CycleLimits& limits) {
  if (iterations < 1) throw Error("MissingDigest", "iteration count must be >= 1");
  if (!endpoints.collector || !endpoints.generator)
    throw Error("Transport", "cycle needs both collector and generator endpoints");

  SynthesizedTask task;
  task.config = config;
  task.toolset = config.toolset;

  std::string query = config.seed.text;  // Q_0
  EvidenceSet evidence;                  // E_0
  for (int k = 1; k <= iterations; ++k) {
    try {
      CollectionResult col =
          collect_evidence(config, k, query, evidence, *endpoints.collector, registry, limits);
      evidence = std::move(col.evidence);

      std::string digest = evidence_digest(evidence, limits.digest_item_cap);
      std::string topic = k == 1 ? config.seed.text : query;
      std::string prompt = render_derivation_prompt(k, config.exemplars, topic, digest);
      std::vector<ChatMessage> msgs{{Role::User, prompt, {}, {}}};
      AssistantTurn turn = chat(*endpoints.generator, msgs, {}, registry);
      DerivedTask derived = parse_derivation_output(turn.reasoning_text, k);
      task.history.push_back(derived);
      query = derived.query;
      task.query = derived.query;
      task.answer = derived.answer;
    } catch (const Error& e) {
      throw Error(e.kind(), "cycle " + config.cycle_id + " round " + std::to_string(k) +
                                ": " + e.what());
    }
  }
  task.evidence = std::move(evidence);
  return task;
}

// ---- serialization ----

namespace {

json call_to_json(const ToolCall& c) {
  return {{"id", c.call_id}, {"tool", c.tool_name}, {"arguments", c.arguments}};
}

ToolCall call_from_json(const json& j) {
  ToolCall c;
  c.call_id = j.at("id").get<std::string>();
  c.tool_name = j.at("tool").get<std::string>();
  c.arguments = j.at("arguments");
  return c;
}

}  // namespace

json task_to_json(const SynthesizedTask& task) {
  json j;
  j["cycle_id"] = task.config.cycle_id;
  j["cycle_index"] = task.cycle_index;
  j["rng_seed"] = task.config.rng_seed;
  j["seed"] = {{"text", task.config.seed.text},
               {"domain", to_string(task.config.seed.domain)},
               {"source", task.config.seed.source}};
  j["toolset"] = task.toolset;
  j["exemplars"] = json::array();
  for (const auto& e : task.config.exemplars)
    j["exemplars"].push_back(
        {{"query_text", e.query_text}, {"source_benchmark", e.source_benchmark}});
  j["query"] = task.query;
  j["answer"] = task.answer;
  j["history"] = json::array();
  for (const auto& h : task.history)
    j["history"].push_back({{"round", h.round},
                            {"query", h.query},
                            {"answer", h.answer},
                            {"reasoning", h.reasoning}});
  j["evidence"] = json::array();
  std::set<std::string> used;
  for (const auto& it : task.evidence.items) {
    // Latency is run-dependent and deliberately left out of the record.
    j["evidence"].push_back({{"round", it.round},
                             {"step", it.step},
                             {"call", call_to_json(it.action)},
                             {"observation",
                              {{"status", to_string(it.observation.status)},
                               {"payload", it.observation.payload}}}});
    used.insert(it.action.tool_name);
  }
  j["stats"] = {{"calls", task.evidence.items.size()},
                {"available", task.toolset.size()},
                {"unique", used.size()}};
  json used_tools = json::array(), unused_tools = json::array();
  for (const auto& name : task.toolset)
    (used.count(name) ? used_tools : unused_tools).push_back(name);
  j["used_tools"] = used_tools;
  j["unused_tools"] = unused_tools;
  return j;
}

SynthesizedTask task_from_json(const json& j) {
  SynthesizedTask task;
  task.config.cycle_id = j.at("cycle_id").get<std::string>();
  task.cycle_index = j.at("cycle_index").get<std::uint64_t>();
  task.config.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  task.config.seed.text = j.at("seed").at("text").get<std::string>();
  task.config.seed.domain = domain_from_string(j.at("seed").at("domain").get<std::string>());
  task.config.seed.source = j.at("seed").value("source", "");
  task.toolset = j.at("toolset").get<std::vector<std::string>>();
  task.config.toolset = task.toolset;
  for (const auto& ej : j.value("exemplars", json::array())) {
    Exemplar e;
    e.query_text = ej.at("query_text").get<std::string>();
    e.source_benchmark = ej.value("source_benchmark", "");
    task.config.exemplars.push_back(std::move(e));
  }
  task.query = j.at("query").get<std::string>();
  task.answer = j.at("answer").get<std::string>();
  for (const auto& hj : j.value("history", json::array()))
    task.history.push_back({hj.at("query").get<std::string>(),
                            hj.at("answer").get<std::string>(),
                            hj.value("reasoning", ""), hj.at("round").get<int>()});
  for (const auto& ij : j.value("evidence", json::array())) {
    EvidenceItem item;
    item.round = ij.at("round").get<int>();
    item.step = ij.at("step").get<int>();
    item.action = call_from_json(ij.at("call"));
    item.observation.call_id = item.action.call_id;
    item.observation.status =
        obs_status_from_string(ij.at("observation").at("status").get<std::string>());
    item.observation.payload = ij.at("observation").at("payload").get<std::string>();
    task.evidence.items.push_back(std::move(item));
  }
  return task;
}

bool replay_evidence(const SynthesizedTask& task, const Registry& registry,
                     const ExecLimits& limits) {
  for (const auto& item : task.evidence.items) {
    Observation obs = execute_tool(item.action, registry, limits);
    if (obs.status != ObsStatus::Ok || obs.payload != item.observation.payload) return false;
  }
  return true;
}

}  // namespace tasksynth
