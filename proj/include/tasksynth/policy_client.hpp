#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tasksynth/common.hpp"
#include "tasksynth/tool_registry.hpp"

namespace tasksynth {

enum class Role { System, User, Assistant, ToolResult };

std::string to_string(Role r);
Role role_from_string(const std::string& s);

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  std::vector<ToolCall> tool_calls;  // assistant turns only
  std::string call_id;               // ToolResult turns only
};

struct AssistantTurn {
  std::string reasoning_text;
  std::vector<ToolCall> tool_calls;
  bool finished() const { return tool_calls.empty(); }
};

struct Decoding {
  double temperature = 1.0;
  double top_p = 1.0;
  int max_turn_tokens = 4096;
};

/// Uniform chat interface. Scripted endpoints must be deterministic functions
/// of the full message history (plus the declared toolset).
class PolicyEndpoint {
 public:
  virtual ~PolicyEndpoint() = default;
  virtual AssistantTurn complete(const std::vector<ChatMessage>& messages,
                                 const std::vector<const ToolSpec*>& declared_tools) = 0;
};

using ScriptFn = std::function<AssistantTurn(const std::vector<ChatMessage>&,
                                             const std::vector<const ToolSpec*>&)>;

class ScriptedEndpoint : public PolicyEndpoint {
 public:
  explicit ScriptedEndpoint(ScriptFn fn) : fn_(std::move(fn)) {}
  AssistantTurn complete(const std::vector<ChatMessage>& messages,
                         const std::vector<const ToolSpec*>& declared_tools) override {
    return fn_(messages, declared_tools);
  }

 private:
  ScriptFn fn_;
};

/// Chat-completions over HTTP. The API key is read from `api_key_env` at call
/// time and passed through as a bearer token; it is never logged.
class RemoteEndpoint : public PolicyEndpoint {
 public:
  RemoteEndpoint(std::string base_url, std::string model,
                 std::string api_key_env = "POLICY_API_KEY", Decoding decoding = {});
  AssistantTurn complete(const std::vector<ChatMessage>& messages,
                         const std::vector<const ToolSpec*>& declared_tools) override;

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_env_;
  Decoding decoding_;
};

// ---- wire format (chat-completions dialect) ----

json messages_to_wire(const std::vector<ChatMessage>& messages);
std::vector<ChatMessage> messages_from_wire(const json& wire);
json tool_declaration(const ToolSpec& spec);
/// Parses one chat-completions assistant message body; throws MalformedTurn
/// (carrying the raw text) when tool-call arguments are unparseable.
AssistantTurn parse_assistant_message(const json& message);

/// Validates the conversation and declared tools, then queries the endpoint.
/// Throws: Error("UnknownTool") before any network call when a declared tool
/// is unregistered; Error("Transport") / Error("MalformedTurn") from remotes.
AssistantTurn chat(PolicyEndpoint& endpoint, const std::vector<ChatMessage>& messages,
                   const std::vector<std::string>& declared_tools, const Registry& registry);

}  // namespace tasksynth
