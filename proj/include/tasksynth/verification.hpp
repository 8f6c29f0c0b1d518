#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tasksynth/policy_client.hpp"

namespace tasksynth {

enum class Judgement { Correct, Partial, Incorrect };

std::string to_string(Judgement j);

struct Verdict {
  Judgement judgement = Judgement::Incorrect;
  std::string explanation;
  std::string verifier_id;
};

std::string render_verification_prompt(const std::string& query, const std::string& reference,
                                       const std::string& model_answer);

/// Extracts JUDGEMENT/EXPLANATION; tolerant of surrounding prose; the
/// judgement word is matched case-insensitively.
Verdict parse_verdict(const std::string& text, const std::string& verifier_id);

struct CrossVerifyResult {
  bool agreed = false;  // both verifiers said Correct
  std::vector<Verdict> verdicts;
  std::string diagnostic;  // non-empty when a verifier call failed
};

/// Two-verifier agreement rule: true iff both judgements are Correct.
/// A failed verifier call yields false with a diagnostic.
CrossVerifyResult cross_verify(const std::string& query, const std::string& reference,
                               const std::string& model_answer,
                               PolicyEndpoint& verifier_a, PolicyEndpoint& verifier_b,
                               const Registry& registry);

/// Mock-pipeline oracle: trim, collapse whitespace, casefold, compare.
bool exact_match_oracle(const std::string& reference, const std::string& model_answer);

}  // namespace tasksynth
