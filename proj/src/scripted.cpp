#include "tasksynth/scripted.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tasksynth/verification.hpp"

namespace tasksynth {

namespace {

std::string hex8(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << (h & 0xffffffffULL);
  return os.str();
}

std::string quoted_topic(const std::string& text) {
  auto b = text.find('"');
  if (b == std::string::npos) return trim(text.substr(0, 40));
  auto e = text.find('"', b + 1);
  if (e == std::string::npos) return trim(text.substr(0, 40));
  return text.substr(b + 1, e - b - 1);
}

/// Last alphanumeric token of length >= 4 in `s`, empty when there is none.
std::string last_long_token(const std::string& s) {
  std::string cur, best;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    } else {
      if (cur.size() >= 4) best = cur;
      cur.clear();
    }
  }
  if (cur.size() >= 4) best = cur;
  return best;
}

json fill_arguments(const ToolSpec& spec, const std::string& topic, int step,
                    const std::string& prev_payload) {
  json args = json::object();
  std::string token = last_long_token(prev_payload);
  for (const auto& p : spec.parameters) {
    if (!p.required) continue;
    if (p.type == "string") {
      if (p.name == "id") {
        args[p.name] = token.empty() ? "REC" + std::to_string(fnv1a(topic) % 100000) : token;
      } else if (p.name == "text") {
        args[p.name] = prev_payload.empty() ? topic : prev_payload.substr(0, 48);
      } else {
        std::string v = topic + " facet " + std::to_string(step);
        if (!token.empty()) v += " " + token;
        args[p.name] = v;
      }
    } else if (p.type == "number" || p.type == "integer") {
      args[p.name] = static_cast<long long>(fnv1a(topic + p.name) % 97 + step);
    } else if (p.type == "boolean") {
      args[p.name] = true;
    }
  }
  return args;
}

std::string last_tool_result(const std::vector<ChatMessage>& messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it)
    if (it->role == Role::ToolResult) return it->content;
  return "";
}

}  // namespace

std::unique_ptr<PolicyEndpoint> make_scripted_collector(int calls_per_round) {
  return std::make_unique<ScriptedEndpoint>(
      [calls_per_round](const std::vector<ChatMessage>& messages,
                        const std::vector<const ToolSpec*>& tools) {
        const std::string& prompt = messages.front().content;
        std::string topic = quoted_topic(prompt);
        int done = 0;
        for (const auto& m : messages)
          if (m.role == Role::Assistant) done += static_cast<int>(m.tool_calls.size());

        AssistantTurn turn;
        if (done >= calls_per_round || tools.empty()) {
          turn.reasoning_text =
              "Gathered " + std::to_string(done) + " observations on \"" + topic + "\".";
          return turn;
        }
        std::uint64_t h = fnv1a(topic + ":" + std::to_string(done));
        const ToolSpec& spec = *tools[h % tools.size()];
        ToolCall call;
        call.tool_name = spec.name;
        call.arguments = fill_arguments(spec, topic, done, last_tool_result(messages));
        call.call_id = "c" + hex8(fnv1a(prompt)) + "-" + std::to_string(done + 1);
        turn.reasoning_text = "Probing " + spec.name + " for \"" + topic + "\".";
        turn.tool_calls.push_back(std::move(call));
        return turn;
      });
}

std::unique_ptr<PolicyEndpoint> make_scripted_generator() {
  return std::make_unique<ScriptedEndpoint>(
      [](const std::vector<ChatMessage>& messages, const std::vector<const ToolSpec*>&) {
        const std::string& prompt = messages.front().content;
        bool evolved = prompt.find("EVOLVED_QUERY:") != std::string::npos;

        std::string topic;
        std::vector<std::string> evidence_lines;
        std::istringstream in(prompt);
        std::string line;
        while (std::getline(in, line)) {
          if (line.rfind("Seed: ", 0) == 0) topic = line.substr(6);
          else if (line.rfind("Current: ", 0) == 0) topic = line.substr(9);
          else if (line.rfind("- ", 0) == 0) evidence_lines.push_back(line.substr(2));
        }
        std::string last_payload = "none";
        if (!evidence_lines.empty()) {
          const std::string& l = evidence_lines.back();
          auto pos = l.find(" -> ");
          last_payload = pos == std::string::npos ? l : l.substr(pos + 4);
          if (last_payload.size() > 60) last_payload.resize(60);
          last_payload = trim(last_payload);
        }
        std::string short_topic = topic.size() > 48 ? topic.substr(0, 48) : topic;
        std::uint64_t h = fnv1a(prompt);

        std::ostringstream os;
        os << (evolved ? "EVOLVED_QUERY: " : "QUERY: ")
           << "Considering the gathered evidence, what key record is associated with \""
           << short_topic << "\"? [case " << hex8(h) << "]\n"
           << (evolved ? "EVOLVED_ANSWER: " : "ANSWER: ") << last_payload << "\n"
           << "REASONING: Grounded in " << evidence_lines.size() << " evidence lines.";
        AssistantTurn turn;
        turn.reasoning_text = os.str();
        return turn;
      });
}

std::unique_ptr<PolicyEndpoint> make_scripted_solver(
    std::function<std::string(const std::string&)> answer_for, int calls_before_answer) {
  return std::make_unique<ScriptedEndpoint>(
      [answer_for, calls_before_answer](const std::vector<ChatMessage>& messages,
                                        const std::vector<const ToolSpec*>& tools) {
        std::string query;
        for (const auto& m : messages)
          if (m.role == Role::User) { query = m.content; break; }
        int done = 0;
        for (const auto& m : messages)
          if (m.role == Role::Assistant) done += static_cast<int>(m.tool_calls.size());

        AssistantTurn turn;
        if (done < calls_before_answer && !tools.empty()) {
          std::uint64_t h = fnv1a(query + "/" + std::to_string(done));
          const ToolSpec& spec = *tools[h % tools.size()];
          ToolCall call;
          call.tool_name = spec.name;
          call.arguments =
              fill_arguments(spec, quoted_topic(query), done, last_tool_result(messages));
          call.call_id = "a" + std::to_string(done + 1);
          turn.reasoning_text = "Checking " + spec.name + ".";
          turn.tool_calls.push_back(std::move(call));
          return turn;
        }
        turn.reasoning_text = answer_for(query);
        return turn;
      });
}

std::unique_ptr<PolicyEndpoint> make_scripted_verifier() {
  return std::make_unique<ScriptedEndpoint>(
      [](const std::vector<ChatMessage>& messages, const std::vector<const ToolSpec*>&) {
        const std::string& prompt = messages.front().content;
        std::string reference, model;
        std::istringstream in(prompt);
        std::string line;
        while (std::getline(in, line)) {
          if (line.rfind("REFERENCE ANSWER: ", 0) == 0) reference = line.substr(18);
          else if (line.rfind("MODEL ANSWER: ", 0) == 0) model = line.substr(14);
        }
        bool ok = exact_match_oracle(reference, model);
        AssistantTurn turn;
        turn.reasoning_text = ok ? "JUDGEMENT: correct\nEXPLANATION: all key facts match"
                                 : "JUDGEMENT: incorrect\nEXPLANATION: answers differ";
        return turn;
      });
}

// ---- demo fixtures ----

namespace {

struct DomainInfo {
  Domain domain;
  const char* prefix;
};

const DomainInfo kExpertDomains[] = {{Domain::Financial, "fin"},
                                     {Domain::Medical, "med"},
                                     {Domain::Academic, "aca"},
                                     {Domain::Biological, "bio"}};

ToolSpec demo_tool(const std::string& name, Domain domain, int variant) {
  ToolSpec t;
  t.name = name;
  t.domain = domain;
  switch (variant) {
    case 0:
      t.primitive = Primitive::Retrieval;
      t.backend = {Backend::Kind::Builtin, "mock_search", "", "POST", ""};
      t.description = "Keyword search over a fixed corpus.";
      t.parameters = {{"query", "string", true, "search terms"}};
      break;
    case 1:
      t.primitive = Primitive::Retrieval;
      t.backend = {Backend::Kind::Builtin, "mock_lookup", "", "POST", ""};
      t.description = "Fetch a record by identifier.";
      t.parameters = {{"id", "string", true, "record identifier"}};
      break;
    case 2:
      t.primitive = Primitive::Processing;
      t.backend = {Backend::Kind::Builtin, "mock_add", "", "POST", ""};
      t.description = "Add two numbers.";
      t.parameters = {{"a", "number", true, "left operand"},
                      {"b", "number", true, "right operand"}};
      break;
    default:
      t.primitive = Primitive::Processing;
      t.backend = {Backend::Kind::Builtin, "mock_transform", "", "POST", ""};
      t.description = "Normalize and transform a text value.";
      t.parameters = {{"text", "string", true, "input text"}};
      break;
  }
  return t;
}

}  // namespace

Registry make_demo_registry(int per_domain) {
  Registry reg;
  for (const auto& d : kExpertDomains) {
    for (int i = 0; i < per_domain; ++i) {
      int variant = i % 4;
      const char* kinds[] = {"search", "lookup", "calc", "transform"};
      std::string name =
          std::string(d.prefix) + "_" + kinds[variant] + "_" + std::to_string(i / 4);
      reg.register_tool(demo_tool(name, d.domain, variant));
    }
  }
  reg.register_tool(demo_tool("web_search", Domain::General, 0));
  reg.register_tool(demo_tool("browse", Domain::General, 1));
  reg.register_tool(demo_tool("calculator", Domain::General, 2));
  reg.register_tool(demo_tool("python_exec", Domain::General, 3));
  return reg;
}

SeedPool make_demo_seed_pool(int per_domain) {
  std::vector<SeedConcept> seeds;
  for (const auto& d : kExpertDomains)
    for (int i = 0; i < per_domain; ++i)
      seeds.push_back({std::string(d.prefix) + " entity " + std::to_string(i), d.domain,
                       "demo", 1});
  return SeedPool::from_records(seeds);
}

ExemplarPool make_demo_exemplar_pool(int count) {
  static const char* templates[] = {
      "What percentage of records in 2023 match the given filter?",
      "Find the identifier of the entry whose score exceeds the threshold.",
      "Compare the two most recent records and report the difference.",
      "Which entity has the highest value in the retrieved table?",
      "Summarize the key fields of the record with the given id.",
      "How many distinct categories appear across the search results?",
  };
  std::vector<Exemplar> ex;
  for (int i = 0; i < count; ++i)
    ex.push_back({std::string(templates[i % 6]) + " (variant " + std::to_string(i) + ")",
                  "demo-bench", 1});
  return ExemplarPool::from_records(ex);
}

void write_demo_fixtures(const std::string& dir, int tools_per_domain, int seeds_per_domain,
                         int exemplar_count) {
  std::filesystem::create_directories(dir);
  Registry reg = make_demo_registry(tools_per_domain);
  {
    std::ofstream out(dir + "/manifest.json", std::ios::binary);
    out << manifest_to_json(reg).dump(2) << "\n";
  }
  SeedPool seed_pool = make_demo_seed_pool(seeds_per_domain);
  ExemplarPool exemplar_pool = make_demo_exemplar_pool(exemplar_count);
  {
    std::ofstream out(dir + "/seeds.jsonl", std::ios::binary);
    for (const auto& s : seed_pool.seeds())
      out << json{{"text", s.text}, {"domain", to_string(s.domain)}, {"source", s.source}}
                 .dump()
          << "\n";
  }
  {
    std::ofstream out(dir + "/exemplars.jsonl", std::ios::binary);
    for (const auto& e : exemplar_pool.exemplars())
      out << json{{"query_text", e.query_text}, {"source_benchmark", e.source_benchmark}}
                 .dump()
          << "\n";
  }
}

}  // namespace tasksynth
