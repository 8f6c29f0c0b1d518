#include "tasksynth/policy_client.hpp"

#include <cstdlib>
#include <set>

#include <httplib.h>

namespace tasksynth {

std::string to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::ToolResult: return "tool";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  if (s == "tool") return Role::ToolResult;
  throw Error("ParseError", "unknown role '" + s + "'");
}

json messages_to_wire(const std::vector<ChatMessage>& messages) {
  json wire = json::array();
  for (const auto& m : messages) {
    json mj;
    mj["role"] = to_string(m.role);
    mj["content"] = m.content;
    if (m.role == Role::Assistant && !m.tool_calls.empty()) {
      mj["tool_calls"] = json::array();
      for (const auto& tc : m.tool_calls) {
        mj["tool_calls"].push_back(
            {{"id", tc.call_id},
             {"type", "function"},
             {"function", {{"name", tc.tool_name}, {"arguments", tc.arguments.dump()}}}});
      }
    }
    if (m.role == Role::ToolResult) mj["tool_call_id"] = m.call_id;
    wire.push_back(std::move(mj));
  }
  return wire;
}

std::vector<ChatMessage> messages_from_wire(const json& wire) {
  std::vector<ChatMessage> out;
  for (const auto& mj : wire) {
    ChatMessage m;
    m.role = role_from_string(mj.at("role").get<std::string>());
    m.content = mj.value("content", "");
    if (mj.contains("tool_calls")) {
      for (const auto& tj : mj["tool_calls"]) {
        ToolCall tc;
        tc.call_id = tj.at("id").get<std::string>();
        tc.tool_name = tj.at("function").at("name").get<std::string>();
        std::string raw = tj.at("function").at("arguments").get<std::string>();
        json args = json::parse(raw, nullptr, false);
        if (args.is_discarded())
          throw Error("MalformedTurn", "unparseable tool-call arguments: " + raw);
        tc.arguments = std::move(args);
        m.tool_calls.push_back(std::move(tc));
      }
    }
    if (mj.contains("tool_call_id")) m.call_id = mj["tool_call_id"].get<std::string>();
    out.push_back(std::move(m));
  }
  return out;
}

json tool_declaration(const ToolSpec& spec) {
  json props = json::object();
  json required = json::array();
  for (const auto& p : spec.parameters) {
    props[p.name] = {{"type", p.type}, {"description", p.description}};
    if (p.required) required.push_back(p.name);
  }
  return {{"type", "function"},
          {"function",
           {{"name", spec.name},
            {"description", spec.description},
            {"parameters",
             {{"type", "object"}, {"properties", props}, {"required", required}}}}}};
}

AssistantTurn parse_assistant_message(const json& message) {
  AssistantTurn turn;
  if (message.contains("content") && message["content"].is_string())
    turn.reasoning_text = message["content"].get<std::string>();
  if (message.contains("tool_calls")) {
    for (const auto& tj : message["tool_calls"]) {
      ToolCall tc;
      try {
        tc.call_id = tj.at("id").get<std::string>();
        tc.tool_name = tj.at("function").at("name").get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw Error("MalformedTurn", "malformed tool_call entry: " + tj.dump());
      }
      std::string raw = tj.at("function").value("arguments", "{}");
      json args = json::parse(raw, nullptr, false);
      if (args.is_discarded() || !args.is_object())
        throw Error("MalformedTurn", "unparseable call arguments for '" + tc.tool_name +
                                         "': " + raw);
      tc.arguments = std::move(args);
      turn.tool_calls.push_back(std::move(tc));
    }
  }
  return turn;
}

RemoteEndpoint::RemoteEndpoint(std::string base_url, std::string model,
                               std::string api_key_env, Decoding decoding)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      api_key_env_(std::move(api_key_env)),
      decoding_(decoding) {}

AssistantTurn RemoteEndpoint::complete(const std::vector<ChatMessage>& messages,
                                       const std::vector<const ToolSpec*>& declared_tools) {
  json body;
  body["model"] = model_;
  body["messages"] = messages_to_wire(messages);
  if (!declared_tools.empty()) {
    body["tools"] = json::array();
    for (const auto* t : declared_tools) body["tools"].push_back(tool_declaration(*t));
  }
  body["temperature"] = decoding_.temperature;
  body["top_p"] = decoding_.top_p;
  body["max_tokens"] = decoding_.max_turn_tokens;

  httplib::Client client(base_url_);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(api_key_env_.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + key);
  auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res)
    throw Error("Transport", "chat request failed: " + httplib::to_string(res.error()));
  if (res->status == 413 || res->status == 400) {
    json ej = json::parse(res->body, nullptr, false);
    std::string code = ej.is_object() ? ej.value("error", json::object()).value("code", "") : "";
    if (code == "context_length_exceeded")
      throw Error("ContextOverflow", "conversation exceeds the model context window");
  }
  if (res->status != 200)
    throw Error("Transport", "chat request returned HTTP " + std::to_string(res->status));
  json rj = json::parse(res->body, nullptr, false);
  if (rj.is_discarded() || !rj.contains("choices") || rj["choices"].empty())
    throw Error("MalformedTurn", "unparseable chat response: " + res->body);
  return parse_assistant_message(rj["choices"][0].at("message"));
}

AssistantTurn chat(PolicyEndpoint& endpoint, const std::vector<ChatMessage>& messages,
                   const std::vector<std::string>& declared_tools, const Registry& registry) {
  if (messages.empty()) throw Error("MalformedTurn", "message list is empty");
  // Role validity: ToolResult messages must answer a call issued earlier in
  // the same conversation.
  std::set<std::string> issued;
  for (const auto& m : messages) {
    if (m.role == Role::Assistant)
      for (const auto& tc : m.tool_calls) issued.insert(tc.call_id);
    if (m.role == Role::ToolResult && !issued.count(m.call_id))
      throw Error("MalformedTurn",
                  "tool result references unknown call_id '" + m.call_id + "'");
  }
  std::vector<const ToolSpec*> tools;
  tools.reserve(declared_tools.size());
  for (const auto& name : declared_tools) tools.push_back(&registry.get(name));
  return endpoint.complete(messages, tools);
}

}  // namespace tasksynth
