#include "tasksynth/tool_registry.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

namespace tasksynth {

std::string to_string(ObsStatus s) {
  switch (s) {
    case ObsStatus::Ok: return "Ok";
    case ObsStatus::ToolError: return "ToolError";
    case ObsStatus::TransportError: return "TransportError";
    case ObsStatus::Timeout: return "Timeout";
  }
  return "ToolError";
}

ObsStatus obs_status_from_string(const std::string& s) {
  if (s == "Ok") return ObsStatus::Ok;
  if (s == "ToolError") return ObsStatus::ToolError;
  if (s == "TransportError") return ObsStatus::TransportError;
  if (s == "Timeout") return ObsStatus::Timeout;
  throw Error("ParseError", "unknown observation status '" + s + "'");
}

// ---- registry ----

namespace {

bool valid_type_tag(const std::string& t) {
  return t == "string" || t == "number" || t == "integer" || t == "boolean";
}

void check_spec(const ToolSpec& spec) {
  if (spec.name.empty())
    throw Error("MalformedSchema", "tool name is empty");
  for (char c : spec.name)
    if (std::isspace(static_cast<unsigned char>(c)))
      throw Error("MalformedSchema", "tool name '" + spec.name + "' contains whitespace");
  bool seen_optional = false;
  std::set<std::string> seen;
  for (const auto& p : spec.parameters) {
    if (p.name.empty())
      throw Error("MalformedSchema", spec.name + ": parameter with empty name");
    if (!seen.insert(p.name).second)
      throw Error("MalformedSchema", spec.name + ": duplicate parameter '" + p.name + "'");
    if (!valid_type_tag(p.type))
      throw Error("MalformedSchema",
                  spec.name + ": parameter '" + p.name + "' has bad type tag '" + p.type + "'");
    if (!p.required) seen_optional = true;
    else if (seen_optional)
      throw Error("MalformedSchema",
                  spec.name + ": required parameter '" + p.name + "' declared after optional ones");
  }
  if (spec.backend.kind == Backend::Kind::Builtin && spec.backend.builtin.empty())
    throw Error("MalformedSchema", spec.name + ": builtin backend without a mock name");
  if (spec.backend.kind == Backend::Kind::Remote && spec.backend.url.empty())
    throw Error("MalformedSchema", spec.name + ": remote backend without a URL");
}

}  // namespace

void Registry::register_tool(ToolSpec spec) {
  check_spec(spec);
  if (index_.count(spec.name))
    throw Error("DuplicateName", "tool '" + spec.name + "' already registered");
  index_[spec.name] = tools_.size();
  tools_.push_back(std::move(spec));
}

const ToolSpec& Registry::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("UnknownTool", "no tool named '" + name + "'");
  return tools_[it->second];
}

const ToolSpec* Registry::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &tools_[it->second];
}

std::vector<const ToolSpec*> Registry::compatible(Domain domain) const {
  std::vector<const ToolSpec*> out;
  for (const auto& t : tools_)
    if (t.domain == domain || t.domain == Domain::General) out.push_back(&t);
  return out;
}

// ---- manifest ----

ToolSpec tool_spec_from_json(const json& j) {
  ToolSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.domain = domain_from_string(j.at("domain").get<std::string>());
  spec.primitive = primitive_from_string(j.at("primitive").get<std::string>());
  spec.description = j.value("description", "");
  for (const auto& pj : j.value("parameters", json::array())) {
    ParamSpec p;
    p.name = pj.at("name").get<std::string>();
    if (!pj.contains("type"))
      throw Error("MalformedSchema",
                  spec.name + ": parameter '" + p.name + "' is missing a type tag");
    p.type = pj.at("type").get<std::string>();
    p.required = pj.value("required", true);
    p.description = pj.value("description", "");
    spec.parameters.push_back(std::move(p));
  }
  const json& b = j.at("backend");
  const std::string kind = b.at("kind").get<std::string>();
  if (kind == "builtin") {
    spec.backend.kind = Backend::Kind::Builtin;
    spec.backend.builtin = b.at("builtin").get<std::string>();
  } else if (kind == "remote") {
    spec.backend.kind = Backend::Kind::Remote;
    spec.backend.url = b.at("url").get<std::string>();
    spec.backend.method = b.value("method", "POST");
    spec.backend.auth_env = b.value("auth_env", "");
  } else {
    throw Error("MalformedSchema", spec.name + ": unknown backend kind '" + kind + "'");
  }
  for (const auto& f : j.value("consistency_fields", json::array()))
    spec.consistency_fields.push_back(f.get<std::string>());
  return spec;
}

json tool_spec_to_json(const ToolSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["domain"] = to_string(spec.domain);
  j["primitive"] = to_string(spec.primitive);
  j["description"] = spec.description;
  j["parameters"] = json::array();
  for (const auto& p : spec.parameters)
    j["parameters"].push_back({{"name", p.name},
                               {"type", p.type},
                               {"required", p.required},
                               {"description", p.description}});
  json b;
  if (spec.backend.kind == Backend::Kind::Builtin) {
    b["kind"] = "builtin";
    b["builtin"] = spec.backend.builtin;
  } else {
    b["kind"] = "remote";
    b["url"] = spec.backend.url;
    b["method"] = spec.backend.method;
    if (!spec.backend.auth_env.empty()) b["auth_env"] = spec.backend.auth_env;
  }
  j["backend"] = b;
  if (!spec.consistency_fields.empty()) j["consistency_fields"] = spec.consistency_fields;
  return j;
}

Registry parse_manifest(const json& doc) {
  Registry reg;
  for (const auto& tj : doc.at("tools")) reg.register_tool(tool_spec_from_json(tj));
  return reg;
}

Registry load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ParseError", "cannot open manifest '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("ParseError", path + ": " + e.what());
  }
  return parse_manifest(doc);
}

json manifest_to_json(const Registry& registry) {
  json doc;
  doc["tools"] = json::array();
  for (const auto& t : registry.tools()) doc["tools"].push_back(tool_spec_to_json(t));
  return doc;
}

// ---- builtin mocks ----

namespace {

std::string json_num(double v) {
  json j = v;
  if (v == static_cast<long long>(v)) j = static_cast<long long>(v);
  return j.dump();
}

// Shared in-flight gauge; divergent payloads only under overlapping calls.
std::string unsafe_counter_backend(const std::string&, const json&) {
  static std::atomic<int> inflight{0};
  int me = ++inflight;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(150);
  int peak = inflight.load();
  while (peak == 1 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::yield();
    peak = inflight.load();
  }
  --inflight;
  if (peak > 1) return "count=" + std::to_string(me);
  return "count=1";
}

// Fresh threads restart the stream, so concurrent one-shot probes agree while
// sequential repeats on one thread drift.
std::string random_suffix_backend(const std::string&, const json& args) {
  thread_local std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  state ^= state << 13;
  state ^= state >> 7;
  state ^= state << 17;
  std::string base = args.value("q", "value");
  return base + "#" + std::to_string(state % 100000);
}

}  // namespace

const std::map<std::string, BuiltinFn>& builtin_backends() {
  static const std::map<std::string, BuiltinFn> table = {
      {"mock_add",
       [](const std::string&, const json& args) {
         double a = args.at("a").get<double>();
         double b = args.at("b").get<double>();
         return json_num(a + b);
       }},
      {"mock_concat",
       [](const std::string&, const json& args) {
         return args.at("left").get<std::string>() + args.at("right").get<std::string>();
       }},
      {"mock_echo",
       [](const std::string&, const json& args) { return args.at("text").get<std::string>(); }},
      // Deterministic pseudo-retrieval: the record is a pure function of
      // (tool name, query), so evidence replays byte-for-byte.
      {"mock_search",
       [](const std::string& tool, const json& args) {
         std::string q = args.at("query").get<std::string>();
         std::uint64_t h = fnv1a(tool + "|" + q);
         std::ostringstream os;
         os << "title=Entry-" << (h % 9973) << " id=REC" << (h / 7 % 100000)
            << " score=" << (h % 100);
         return os.str();
       }},
      {"mock_lookup",
       [](const std::string& tool, const json& args) {
         std::string id = args.at("id").get<std::string>();
         std::uint64_t h = fnv1a(tool + "#" + id);
         std::ostringstream os;
         os << "record{id=" << id << " field_a=" << (h % 1000)
            << " field_b=tag" << (h / 1000 % 97) << "}";
         return os.str();
       }},
      {"mock_transform",
       [](const std::string&, const json& args) {
         std::string t = args.at("text").get<std::string>();
         std::string rev(t.rbegin(), t.rend());
         return "transformed=" + to_lower(rev) + " len=" + std::to_string(t.size());
       }},
      {"mock_unsafe_counter", unsafe_counter_backend},
      {"mock_random_suffix", random_suffix_backend},
  };
  return table;
}

// ---- execution ----

std::optional<std::string> check_arguments(const ToolSpec& spec, const json& args) {
  if (!args.is_object()) return "arguments must be an object";
  for (const auto& p : spec.parameters) {
    auto it = args.find(p.name);
    if (it == args.end()) {
      if (p.required) return "missing required parameter '" + p.name + "'";
      continue;
    }
    const json& v = *it;
    bool ok = (p.type == "string" && v.is_string()) ||
              (p.type == "number" && v.is_number()) ||
              (p.type == "integer" && v.is_number_integer()) ||
              (p.type == "boolean" && v.is_boolean());
    if (!ok)
      return "parameter '" + p.name + "' does not match type tag '" + p.type + "'";
  }
  for (auto it = args.begin(); it != args.end(); ++it) {
    bool declared = false;
    for (const auto& p : spec.parameters)
      if (p.name == it.key()) { declared = true; break; }
    if (!declared) return "unknown parameter '" + it.key() + "'";
  }
  return std::nullopt;
}

namespace {

std::string truncate_payload(std::string payload, std::size_t max_payload) {
  if (payload.size() <= max_payload) return payload;
  payload.resize(max_payload);
  return payload + kTruncationMarker;
}

Observation remote_call(const ToolSpec& spec, const ToolCall& call, const ExecLimits& limits) {
  Observation obs;
  obs.call_id = call.call_id;
  httplib::Client client(spec.backend.url);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(limits.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(limits.timeout - secs);
  client.set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
  client.set_connection_timeout(static_cast<time_t>(secs.count()),
                                static_cast<time_t>(usecs.count()));
  httplib::Headers headers;
  if (!spec.backend.auth_env.empty()) {
    if (const char* cred = std::getenv(spec.backend.auth_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + cred);
  }
  json body = {{"tool", call.tool_name}, {"arguments", call.arguments}};
  auto res = client.Post("/", headers, body.dump(), "application/json");
  if (!res) {
    obs.status = res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout
                     ? ObsStatus::Timeout
                     : ObsStatus::TransportError;
    obs.payload = "transport failure: " + httplib::to_string(res.error());
    return obs;
  }
  if (res->status != 200) {
    obs.status = ObsStatus::TransportError;
    obs.payload = "HTTP " + std::to_string(res->status);
    return obs;
  }
  try {
    json rj = json::parse(res->body);
    std::string status = rj.at("status").get<std::string>();
    obs.payload = rj.value("payload", "");
    obs.status = status == "ok" ? ObsStatus::Ok : ObsStatus::ToolError;
  } catch (const nlohmann::json::exception& e) {
    obs.status = ObsStatus::ToolError;
    obs.payload = std::string("unparseable backend response: ") + e.what();
  }
  return obs;
}

}  // namespace

Observation execute_tool(const ToolCall& call, const Registry& registry,
                         const ExecLimits& limits) {
  auto start = std::chrono::steady_clock::now();
  Observation obs;
  obs.call_id = call.call_id;
  auto finish = [&](Observation o) {
    o.latency = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start);
    o.payload = truncate_payload(std::move(o.payload), limits.max_payload);
    return o;
  };

  const ToolSpec* spec = registry.find(call.tool_name);
  if (!spec) {
    obs.status = ObsStatus::ToolError;
    obs.payload = "UnknownTool: no tool named '" + call.tool_name + "'";
    return finish(std::move(obs));
  }
  if (auto diag = check_arguments(*spec, call.arguments)) {
    obs.status = ObsStatus::ToolError;
    obs.payload = "ArgumentMismatch: " + *diag;
    return finish(std::move(obs));
  }

  if (spec->backend.kind == Backend::Kind::Remote)
    return finish(remote_call(*spec, call, limits));

  const auto& table = builtin_backends();
  auto it = table.find(spec->backend.builtin);
  if (it == table.end()) {
    obs.status = ObsStatus::ToolError;
    obs.payload = "UnknownBuiltin: no mock named '" + spec->backend.builtin + "'";
    return finish(std::move(obs));
  }
  try {
    obs.payload = it->second(call.tool_name, call.arguments);
    obs.status = ObsStatus::Ok;
    if (obs.payload.empty()) obs.payload = "[empty result]";
  } catch (const std::exception& e) {
    obs.status = ObsStatus::ToolError;
    obs.payload = std::string("mock failure: ") + e.what();
  }
  return finish(std::move(obs));
}

// ---- validation harness ----

namespace {

std::string project_payload(const ToolSpec& spec, const std::string& payload) {
  if (spec.consistency_fields.empty()) return payload;
  json parsed = json::parse(payload, nullptr, false);
  if (parsed.is_discarded()) return payload;
  json proj;
  for (const auto& f : spec.consistency_fields)
    if (parsed.contains(f)) proj[f] = parsed[f];
  return proj.dump();
}

}  // namespace

ValidationReport validate_tool(const Registry& registry, const std::string& tool_name,
                               const std::vector<ValidationCase>& suite,
                               int fanout, int repeats, const ExecLimits& limits) {
  if (suite.empty()) throw Error("EmptySuite", "validation suite for '" + tool_name + "' is empty");
  if (fanout < 2 || repeats < 2)
    throw Error("EmptySuite", "fanout and repeats must both be >= 2");

  const ToolSpec& spec = registry.get(tool_name);
  ValidationReport report;
  report.tool_name = tool_name;

  // Correctness: every case's observation satisfies its predicate.
  {
    report.correctness.passed = true;
    std::ostringstream detail;
    int idx = 0;
    for (const auto& vc : suite) {
      ToolCall call{tool_name, vc.arguments, "validate-" + std::to_string(idx)};
      Observation obs = execute_tool(call, registry, limits);
      bool ok = vc.expect && vc.expect(obs);
      detail << "case " << idx << (ok ? " pass" : " FAIL") << "; ";
      if (!ok) report.correctness.passed = false;
      ++idx;
    }
    report.correctness.detail = detail.str();
  }

  // Concurrency safety: fanout simultaneous invocations of the first case.
  {
    const ValidationCase& vc = suite.front();
    std::vector<Observation> obs(static_cast<std::size_t>(fanout));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(fanout));
    for (int i = 0; i < fanout; ++i) {
      threads.emplace_back([&, i] {
        ToolCall call{tool_name, vc.arguments, "fanout-" + std::to_string(i)};
        obs[static_cast<std::size_t>(i)] = execute_tool(call, registry, limits);
      });
    }
    for (auto& t : threads) t.join();
    bool all_ok = true;
    for (const auto& o : obs) all_ok = all_ok && o.status == ObsStatus::Ok;
    bool consistent = true;
    std::string first = project_payload(spec, obs.front().payload);
    std::string divergent;
    for (const auto& o : obs) {
      std::string p = project_payload(spec, o.payload);
      if (p != first) { consistent = false; divergent = p; break; }
    }
    report.concurrency_safety.passed = all_ok && consistent;
    if (!all_ok)
      report.concurrency_safety.detail = "non-Ok status under concurrent invocation";
    else if (!consistent)
      report.concurrency_safety.detail =
          "divergent payloads under concurrency: '" + first + "' vs '" + divergent + "'";
    else
      report.concurrency_safety.detail = "all " + std::to_string(fanout) + " payloads agree";
  }

  // Response consistency: sequential invocations spaced over the run.
  {
    const ValidationCase& vc = suite.front();
    std::string first;
    bool consistent = true;
    std::string divergent;
    for (int i = 0; i < repeats; ++i) {
      ToolCall call{tool_name, vc.arguments, "repeat-" + std::to_string(i)};
      Observation o = execute_tool(call, registry, limits);
      std::string p = project_payload(spec, o.payload);
      if (i == 0) first = p;
      else if (p != first) { consistent = false; divergent = p; break; }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    report.response_consistency.passed = consistent;
    report.response_consistency.detail =
        consistent ? std::to_string(repeats) + " repeats agree"
                   : "payload drift across repeats: '" + first + "' vs '" + divergent + "'";
  }

  report.verdict = report.correctness.passed && report.concurrency_safety.passed &&
                           report.response_consistency.passed
                       ? ValidationReport::Verdict::Robust
                       : ValidationReport::Verdict::Rejected;
  return report;
}

// ---- toolset sampling ----

std::vector<std::string> sample_toolset(const Registry& registry, Domain domain,
                                        std::size_t lo, std::size_t hi, Rng& rng) {
  if (lo < 1 || hi < lo) throw Error("InsufficientTools", "bad size range");
  auto pool = registry.compatible(domain);
  if (pool.size() < lo)
    throw Error("InsufficientTools",
                "only " + std::to_string(pool.size()) + " tools compatible with " +
                    to_string(domain) + ", need at least " + std::to_string(lo));
  std::size_t max_size = std::min(hi, pool.size());
  std::size_t size = lo + static_cast<std::size_t>(rng.bounded(max_size - lo + 1));
  // Partial Fisher-Yates draws the subset without replacement, then a full
  // shuffle fixes the prompt order.
  std::vector<const ToolSpec*> chosen(pool.begin(), pool.end());
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.bounded(chosen.size() - i));
    std::swap(chosen[i], chosen[j]);
  }
  chosen.resize(size);
  shuffle(chosen, rng);
  std::vector<std::string> names;
  names.reserve(size);
  for (const auto* t : chosen) names.push_back(t->name);
  return names;
}

}  // namespace tasksynth
