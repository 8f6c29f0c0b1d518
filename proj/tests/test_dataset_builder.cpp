#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tasksynth/dataset_builder.hpp"
#include "tasksynth/scripted.hpp"

using namespace tasksynth;

namespace {

SynthesizedTask simple_task(const std::string& query, const std::string& answer) {
  SynthesizedTask t;
  t.query = query;
  t.answer = answer;
  t.toolset = {"web_search", "python_exec"};
  t.config.cycle_id = "cycle-x";
  t.config.seed = {"seed", Domain::General, "test", 1};
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("the oracle judge is the exact-match oracle") {
  JudgeFn judge = oracle_judge();
  CHECK(judge("q", "The Cat", " the cat ") == Judgement::Correct);
  CHECK(judge("q", "cat", "dog") == Judgement::Incorrect);
}

TEST_CASE("rejection sampling keeps only verified-correct trajectories") {
  Registry reg = make_demo_registry(8);
  SynthesizedTask task = simple_task("what is it?", "the value");

  auto right = make_scripted_solver([](const std::string&) { return "The Value"; });
  auto accepted = rollout_and_reject(task, *right, reg, oracle_judge());
  REQUIRE(accepted.has_value());
  CHECK(accepted->attempt == 1);
  CHECK(accepted->final_answer == "The Value");
  CHECK(accepted->judgement == Judgement::Correct);
  CHECK(accepted->cycle_id == "cycle-x");
  CHECK(accepted->trace.budget_used >= 1);  // the solver consulted a tool first

  auto wrong = make_scripted_solver([](const std::string&) { return "nope"; });
  CHECK_FALSE(rollout_and_reject(task, *wrong, reg, oracle_judge()).has_value());
  CHECK_FALSE(rollout_and_reject(task, *wrong, reg, oracle_judge(), 4).has_value());
  CHECK_THROWS_AS(rollout_and_reject(task, *wrong, reg, oracle_judge(), 0), Error);
}

TEST_CASE("the accepted attempt index reflects earlier failures") {
  Registry reg = make_demo_registry(8);
  SynthesizedTask task = simple_task("q", "right");
  AttemptScriptedEndpoint teacher(
      [](int attempt, const std::vector<ChatMessage>&, const std::vector<const ToolSpec*>&) {
        AssistantTurn turn;
        turn.reasoning_text = attempt == 3 ? "right" : "wrong";
        return turn;
      });
  auto accepted = rollout_and_reject(task, teacher, reg, oracle_judge(), 5);
  REQUIRE(accepted.has_value());
  CHECK(accepted->attempt == 3);
}

TEST_CASE("endpoint errors count as failed attempts instead of aborting") {
  Registry reg = make_demo_registry(8);
  SynthesizedTask task = simple_task("q", "right");
  AttemptScriptedEndpoint teacher(
      [](int attempt, const std::vector<ChatMessage>&,
         const std::vector<const ToolSpec*>&) -> AssistantTurn {
        if (attempt == 1) throw Error("Transport", "connection reset");
        return AssistantTurn{"right", {}};
      });
  auto accepted = rollout_and_reject(task, teacher, reg, oracle_judge(), 3);
  REQUIRE(accepted.has_value());
  CHECK(accepted->attempt == 2);
}

TEST_CASE("learnability estimation counts successes over k rollouts") {
  Registry reg = make_demo_registry(8);
  SynthesizedTask task = simple_task("q", "right");
  // succeeds on rollouts 2, 5 and 7 of 8
  AttemptScriptedEndpoint policy(
      [](int attempt, const std::vector<ChatMessage>&, const std::vector<const ToolSpec*>&) {
        bool hit = attempt == 2 || attempt == 5 || attempt == 7;
        return AssistantTurn{hit ? "right" : "wrong", {}};
      });
  LearnabilityEstimate est = estimate_learnability(task, policy, reg, oracle_judge(), 8);
  CHECK(est.successes == 3);
  CHECK(est.k_rl == 8);
  CHECK(est.cycle_id == "cycle-x");
  CHECK_THROWS_AS(estimate_learnability(task, policy, reg, oracle_judge(), 0), Error);
}

TEST_CASE("frontier filtering keeps the band and checks its preconditions") {
  auto est = [](int successes) {
    LearnabilityEstimate e;
    e.successes = successes;
    e.k_rl = 8;
    return e;
  };
  std::vector<LearnabilityEstimate> all = {est(0), est(1), est(4), est(5), est(6), est(8)};
  auto kept = filter_frontier(all, 1, 5);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].successes == 1);
  CHECK(kept[1].successes == 4);
  CHECK(kept[2].successes == 5);

  CHECK_THROWS_AS(filter_frontier(all, 0, 5), Error);  // 0 keeps unlearnable tasks
  CHECK_THROWS_AS(filter_frontier(all, 1, 8), Error);  // 8 keeps saturated tasks
  CHECK(filter_frontier({}, 1, 5).empty());
}

TEST_CASE("format violations are schema failures, not transport noise") {
  RolloutTrace clean;
  clean.steps.push_back({"r", ToolCall{"t", json::object(), "c"},
                         Observation{"c", ObsStatus::Ok, "fine", {}}});
  CHECK_FALSE(has_format_violation(clean));

  for (const char* prefix : {"ArgumentMismatch: missing required parameter 'q'",
                             "UnknownTool: no tool named 'x'",
                             "ToolNotInToolset: 'x' is not part of the declared toolset"}) {
    RolloutTrace bad = clean;
    bad.steps.push_back({"", ToolCall{"t", json::object(), "c2"},
                         Observation{"c2", ObsStatus::ToolError, prefix, {}}});
    CHECK(has_format_violation(bad));
  }

  RolloutTrace transport = clean;
  transport.steps.push_back({"", ToolCall{"t", json::object(), "c3"},
                             Observation{"c3", ObsStatus::TransportError, "HTTP 502", {}}});
  CHECK_FALSE(has_format_violation(transport));
  RolloutTrace toolerr = clean;
  toolerr.steps.push_back({"", ToolCall{"t", json::object(), "c4"},
                           Observation{"c4", ObsStatus::ToolError, "mock failure: x", {}}});
  CHECK_FALSE(has_format_violation(toolerr));
}

TEST_CASE("reward combines the format penalty and the correctness term") {
  SynthesizedTask task = simple_task("q", "right");
  JudgeFn graded = [](const std::string&, const std::string&, const std::string& answer) {
    if (answer == "right") return Judgement::Correct;
    if (answer == "close") return Judgement::Partial;
    return Judgement::Incorrect;
  };
  RolloutTrace clean;
  RolloutTrace violating;
  violating.steps.push_back(
      {"", ToolCall{"t", json::object(), "c"},
       Observation{"c", ObsStatus::ToolError, "UnknownTool: no tool named 't'", {}}});

  auto total = [&](RolloutTrace t, const std::string& answer) {
    t.final_answer = answer;
    return compute_reward(t, task, graded, 0.1).total;
  };
  CHECK(total(clean, "right") == doctest::Approx(1.0));
  CHECK(total(violating, "right") == doctest::Approx(0.9));
  CHECK(total(clean, "close") == doctest::Approx(0.0));
  CHECK(total(violating, "close") == doctest::Approx(-0.1));
  CHECK(total(clean, "wrong") == doctest::Approx(0.0));
  CHECK(total(violating, "wrong") == doctest::Approx(-0.1));

  RolloutTrace t = clean;
  t.final_answer = "right";
  Reward r = compute_reward(t, task, graded, 0.5);
  CHECK(r.alpha == doctest::Approx(0.5));
  CHECK(r.r_format == doctest::Approx(0.0));
  CHECK(r.r_correct == doctest::Approx(1.0));
}

TEST_CASE("exports are deterministic JSONL with full trajectories") {
  Registry reg = make_demo_registry(8);
  SynthesizedTask t1 = simple_task("q one?", "alpha");
  SynthesizedTask t2 = simple_task("q two?", "beta");
  auto teacher = make_scripted_solver([](const std::string& q) {
    return q == "q one?" ? std::string("alpha") : std::string("beta");
  });
  std::vector<AcceptedTrajectory> accepted;
  for (const auto& t : {t1, t2})
    accepted.push_back(*rollout_and_reject(t, *teacher, reg, oracle_judge()));

  export_sft(accepted, "sft_test_a.jsonl");
  export_sft(accepted, "sft_test_b.jsonl");
  CHECK(read_file("sft_test_a.jsonl") == read_file("sft_test_b.jsonl"));

  std::ifstream in("sft_test_a.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    json j = json::parse(line);
    CHECK(j.at("judgement") == "correct");
    CHECK(j.at("messages").is_array());
    CHECK(j.at("messages")[0]["role"] == "user");
    CHECK(j.at("steps").is_array());
    ++lines;
  }
  CHECK(lines == 2);

  export_rl({t1, t2}, "rl_test.jsonl");
  std::ifstream rin("rl_test.jsonl");
  std::set<std::string> queries;
  while (std::getline(rin, line)) queries.insert(json::parse(line).at("query"));
  CHECK(queries == std::set<std::string>{"q one?", "q two?"});

  std::remove("sft_test_a.jsonl");
  std::remove("sft_test_b.jsonl");
  std::remove("rl_test.jsonl");
}
