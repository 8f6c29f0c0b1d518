#include "tasksynth/verification.hpp"

#include <sstream>

namespace tasksynth {

std::string to_string(Judgement j) {
  switch (j) {
    case Judgement::Correct: return "correct";
    case Judgement::Partial: return "partial";
    case Judgement::Incorrect: return "incorrect";
  }
  return "incorrect";
}

std::string render_verification_prompt(const std::string& query, const std::string& reference,
                                       const std::string& model_answer) {
  if (query.empty() || reference.empty() || model_answer.empty())
    throw Error("EmptySlot", "verification prompt slots must all be non-empty");
  std::ostringstream os;
  os << "Evaluate the correctness of the model's answer.\n\n"
     << "QUERY: " << query << "\n"
     << "REFERENCE ANSWER: " << reference << "\n"
     << "MODEL ANSWER: " << model_answer << "\n\n"
     << "Evaluation criteria:\n"
     << "- Compare factual content, not surface format\n"
     << "- Ignore differences in phrasing or presentation\n"
     << "- Focus on whether the core factual claims are correct\n\n"
     << "Output format:\n"
     << "JUDGEMENT: [correct/partial/incorrect]\n"
     << "EXPLANATION: [Brief justification]\n\n"
     << "Use \"correct\" if all key facts match, \"partial\" if the core answer is right "
        "but some details are wrong or missing, \"incorrect\" if the main answer is wrong.";
  return os.str();
}

Verdict parse_verdict(const std::string& text, const std::string& verifier_id) {
  std::istringstream in(text);
  std::string line;
  std::string judgement_word;
  std::string explanation;
  bool found = false;
  bool in_explanation = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.rfind("JUDGEMENT:", 0) == 0) {
      judgement_word = trim(t.substr(10));
      found = true;
      in_explanation = false;
    } else if (t.rfind("EXPLANATION:", 0) == 0) {
      explanation = trim(t.substr(12));
      in_explanation = true;
    } else if (in_explanation && !t.empty()) {
      explanation += "\n" + t;
    }
  }
  if (!found) throw Error("MissingJudgement", "no JUDGEMENT line in verdict text");

  // Strip optional brackets and trailing punctuation around the word.
  std::string w = to_lower(judgement_word);
  while (!w.empty() && (w.front() == '[' || w.front() == ' ')) w.erase(w.begin());
  while (!w.empty() && (w.back() == ']' || w.back() == '.' || w.back() == ' ')) w.pop_back();

  Verdict v;
  v.verifier_id = verifier_id;
  v.explanation = explanation;
  if (w == "correct") v.judgement = Judgement::Correct;
  else if (w == "partial") v.judgement = Judgement::Partial;
  else if (w == "incorrect") v.judgement = Judgement::Incorrect;
  else throw Error("UnknownJudgementWord", "'" + judgement_word + "' is not in the vocabulary");
  return v;
}

CrossVerifyResult cross_verify(const std::string& query, const std::string& reference,
                               const std::string& model_answer,
                               PolicyEndpoint& verifier_a, PolicyEndpoint& verifier_b,
                               const Registry& registry) {
  CrossVerifyResult result;
  std::string prompt = render_verification_prompt(query, reference, model_answer);
  std::vector<ChatMessage> msgs{{Role::User, prompt, {}, {}}};
  PolicyEndpoint* verifiers[2] = {&verifier_a, &verifier_b};
  int correct = 0;
  for (int i = 0; i < 2; ++i) {
    std::string id = "verifier-" + std::to_string(i + 1);
    try {
      AssistantTurn turn = chat(*verifiers[i], msgs, {}, registry);
      Verdict v = parse_verdict(turn.reasoning_text, id);
      if (v.judgement == Judgement::Correct) ++correct;
      result.verdicts.push_back(std::move(v));
    } catch (const Error& e) {
      // Conservative: a failed verifier call can never yield acceptance.
      result.diagnostic = id + " failed: " + e.what();
      result.verdicts.push_back({Judgement::Incorrect, result.diagnostic, id});
    }
  }
  result.agreed = correct == 2 && result.diagnostic.empty();
  return result;
}

bool exact_match_oracle(const std::string& reference, const std::string& model_answer) {
  return normalize_answer(reference) == normalize_answer(model_answer);
}

}  // namespace tasksynth
