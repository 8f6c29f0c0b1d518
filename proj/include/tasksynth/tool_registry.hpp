#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tasksynth/common.hpp"

namespace tasksynth {

// ---- tool specifications ----

struct ParamSpec {
  std::string name;
  std::string type;  // "string" | "number" | "integer" | "boolean"
  bool required = true;
  std::string description;
};

struct Backend {
  enum class Kind { Builtin, Remote };
  Kind kind = Kind::Builtin;
  std::string builtin;      // registered mock name, Builtin only
  std::string url;          // Remote only
  std::string method = "POST";
  std::string auth_env;     // env var holding a credential, passed through, never logged
};

struct ToolSpec {
  std::string name;
  Domain domain = Domain::General;
  Primitive primitive = Primitive::Retrieval;
  std::string description;
  std::vector<ParamSpec> parameters;
  Backend backend;
  // Optional field projection for the consistency predicate: when non-empty
  // and the payload parses as JSON, only these top-level fields are compared.
  std::vector<std::string> consistency_fields;
};

struct ToolCall {
  std::string tool_name;
  json arguments = json::object();
  std::string call_id;
};

enum class ObsStatus { Ok, ToolError, TransportError, Timeout };

std::string to_string(ObsStatus s);
ObsStatus obs_status_from_string(const std::string& s);

struct Observation {
  std::string call_id;
  ObsStatus status = ObsStatus::Ok;
  std::string payload;
  std::chrono::microseconds latency{0};
};

struct ExecLimits {
  std::chrono::milliseconds timeout{10000};
  std::size_t max_payload = 16 * 1024;
};

inline constexpr const char* kTruncationMarker = "...[truncated]";

// ---- validation ----

struct ValidationCase {
  json arguments = json::object();
  std::function<bool(const Observation&)> expect;
  std::string description;
};

struct CheckResult {
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::string tool_name;
  CheckResult correctness;
  CheckResult concurrency_safety;
  CheckResult response_consistency;
  enum class Verdict { Robust, Rejected };
  Verdict verdict = Verdict::Rejected;
};

// ---- registry ----

using BuiltinFn = std::function<std::string(const std::string& tool_name, const json& args)>;

/// Immutable after the load/registration phase; safe to share across workers.
class Registry {
 public:
  void register_tool(ToolSpec spec);

  bool has(const std::string& name) const { return index_.count(name) > 0; }
  const ToolSpec& get(const std::string& name) const;
  const ToolSpec* find(const std::string& name) const;
  std::size_t size() const { return tools_.size(); }
  const std::vector<ToolSpec>& tools() const { return tools_; }

  /// Tools tagged with `domain` plus all General tools, in registration order.
  std::vector<const ToolSpec*> compatible(Domain domain) const;

 private:
  std::vector<ToolSpec> tools_;
  std::map<std::string, std::size_t> index_;
};

/// Loads a manifest file (one JSON document listing ToolSpecs).
Registry load_manifest(const std::string& path);
Registry parse_manifest(const json& doc);
json manifest_to_json(const Registry& registry);
json tool_spec_to_json(const ToolSpec& spec);
ToolSpec tool_spec_from_json(const json& j);

// ---- builtin mock backends ----

/// The default table of deterministic builtin mocks (mock_add, mock_search, ...)
/// plus the purposely misbehaving ones used by the validation harness tests.
const std::map<std::string, BuiltinFn>& builtin_backends();

// ---- operations ----

/// Executes a tool call. Tool-side failures never throw: unknown tools and
/// schema violations come back as ToolError observations so the synthesis
/// loop can keep going.
Observation execute_tool(const ToolCall& call, const Registry& registry,
                         const ExecLimits& limits = {});

/// Validates argument values against a spec's parameter schema.
/// Returns a diagnostic message, or nullopt when the arguments conform.
std::optional<std::string> check_arguments(const ToolSpec& spec, const json& args);

ValidationReport validate_tool(const Registry& registry, const std::string& tool_name,
                               const std::vector<ValidationCase>& suite,
                               int fanout = 8, int repeats = 4,
                               const ExecLimits& limits = {});

/// Uniformly sampled subset of size in [lo, hi] from tools compatible with
/// `domain`, then uniformly shuffled. Order is part of the value.
std::vector<std::string> sample_toolset(const Registry& registry, Domain domain,
                                        std::size_t lo, std::size_t hi, Rng& rng);

}  // namespace tasksynth
