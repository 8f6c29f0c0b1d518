#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>

#include "tasksynth/pipeline.hpp"
#include "tasksynth/verification.hpp"

using namespace tasksynth;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string manifest;
  std::string seeds;
  std::string exemplars;
  std::string out_dir;
  std::string store;
  int cycles = -1;
  int workers = -1;
  long long seed = -1;
  std::string mode;
  std::string base_url;
  std::string model;
  std::string api_key_env;
};

RunConfig resolve_config(const CommonOpts& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_run_config(o.config_path);
  if (!o.manifest.empty()) cfg.manifest_path = o.manifest;
  if (!o.seeds.empty()) cfg.seeds_path = o.seeds;
  if (!o.exemplars.empty()) cfg.exemplars_path = o.exemplars;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.cycles >= 0) cfg.cycles = o.cycles;
  if (o.workers >= 1) cfg.workers = o.workers;
  if (o.seed >= 0) cfg.global_seed = static_cast<std::uint64_t>(o.seed);
  if (!o.mode.empty()) cfg.mode = o.mode;
  if (!o.base_url.empty()) cfg.base_url = o.base_url;
  if (!o.model.empty()) cfg.model = o.model;
  if (!o.api_key_env.empty()) cfg.api_key_env = o.api_key_env;
  if (cfg.mode != "scripted" && cfg.mode != "remote")
    throw Error("ParseError", "mode must be 'scripted' or 'remote'");
  if (cfg.mode == "remote" && cfg.base_url.empty())
    throw Error("ParseError", "remote mode needs --base-url");
  return cfg;
}

Registry load_registry(const RunConfig& cfg) {
  if (cfg.manifest_path.empty()) return make_demo_registry();
  return load_manifest(cfg.manifest_path);
}

SeedPool load_seeds(const RunConfig& cfg) {
  if (cfg.seeds_path.empty()) return make_demo_seed_pool();
  return SeedPool::load(cfg.seeds_path);
}

ExemplarPool load_exemplars(const RunConfig& cfg) {
  if (cfg.exemplars_path.empty()) return make_demo_exemplar_pool();
  return ExemplarPool::load(cfg.exemplars_path);
}

/// Solver used by the offline dataset commands: answers from a query->answer
/// table built off the task store, so acceptance is exercised end to end
/// without a live model.
std::unique_ptr<PolicyEndpoint> make_store_solver(const std::vector<SynthesizedTask>& tasks) {
  auto table = std::make_shared<std::map<std::string, std::string>>();
  for (const auto& t : tasks) (*table)[t.query] = t.answer;
  return make_scripted_solver(
      [table](const std::string& query) {
        auto it = table->find(query);
        return it == table->end() ? std::string("unknown") : it->second;
      },
      1);
}

std::unique_ptr<PolicyEndpoint> make_solver(const RunConfig& cfg,
                                            const std::vector<SynthesizedTask>& tasks) {
  if (cfg.mode == "remote")
    return std::make_unique<RemoteEndpoint>(cfg.base_url, cfg.model, cfg.api_key_env);
  return make_store_solver(tasks);
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_store) {
  cmd->add_option("--config", o.config_path, "run config JSON file");
  cmd->add_option("--manifest", o.manifest, "tool manifest path (default: builtin demo)");
  cmd->add_option("--seeds", o.seeds, "seed pool JSONL (default: builtin demo)");
  cmd->add_option("--exemplars", o.exemplars, "exemplar pool JSONL (default: builtin demo)");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--mode", o.mode, "'scripted' (offline mocks) or 'remote'");
  cmd->add_option("--base-url", o.base_url, "chat-completions base URL (remote mode)");
  cmd->add_option("--model", o.model, "model name (remote mode)");
  cmd->add_option("--api-key-env", o.api_key_env,
                  "env var holding the bearer token (never logged)");
  if (with_store) cmd->add_option("--store", o.store, "task store JSONL");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidence-grounded agentic task synthesis pipeline"};
  app.require_subcommand(1);

  CommonOpts o;

  auto* validate = app.add_subcommand("validate", "Validate every tool in the registry");
  int fanout = 8, repeats = 4;
  validate->add_option("--fanout", fanout, "simultaneous calls in the concurrency check");
  validate->add_option("--repeats", repeats, "sequential calls in the consistency check");
  add_common(validate, o, false);

  auto* synth = app.add_subcommand("synthesize", "Run synthesis cycles into a task store");
  synth->add_option("--cycles", o.cycles, "number of cycles to run");
  synth->add_option("--workers", o.workers, "worker threads");
  synth->add_option("--seed", o.seed, "global seed");
  add_common(synth, o, false);

  auto* verify = app.add_subcommand("verify", "Replay a task store's evidence");
  add_common(verify, o, true);

  auto* sft = app.add_subcommand("build-sft", "Rejection-sample teacher trajectories");
  int attempts = 1;
  sft->add_option("--attempts", attempts, "rollout attempts per task");
  add_common(sft, o, true);

  auto* rl = app.add_subcommand("filter-rl", "Keep tasks on the learnability frontier");
  int k_rl = 8, lo = 1, hi = 5;
  rl->add_option("--k", k_rl, "rollouts per task");
  rl->add_option("--lo", lo, "minimum successes kept");
  rl->add_option("--hi", hi, "maximum successes kept");
  add_common(rl, o, true);

  auto* analyze = app.add_subcommand("analyze", "Structural diversity report for a store");
  std::string json_out;
  analyze->add_option("--json", json_out, "also write the report as JSON to this path");
  add_common(analyze, o, true);

  auto* fixtures = app.add_subcommand("demo-fixtures", "Write the builtin demo fixtures");
  std::string fixtures_dir = "fixtures";
  fixtures->add_option("--dir", fixtures_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fixtures->parsed()) {
      write_demo_fixtures(fixtures_dir);
      std::cout << "wrote manifest.json, seeds.jsonl, exemplars.jsonl to " << fixtures_dir
                << "\n";
      return 0;
    }

    RunConfig cfg = resolve_config(o);
    Registry registry = load_registry(cfg);

    if (validate->parsed()) {
      ValidationSummary summary = validate_registry(registry, fanout, repeats);
      for (const auto& r : summary.reports) {
        std::cout << r.tool_name << ": "
                  << (r.verdict == ValidationReport::Verdict::Robust ? "robust" : "rejected");
        if (r.verdict != ValidationReport::Verdict::Robust) {
          if (!r.correctness.passed) std::cout << " [correctness: " << r.correctness.detail << "]";
          if (!r.concurrency_safety.passed)
            std::cout << " [concurrency: " << r.concurrency_safety.detail << "]";
          if (!r.response_consistency.passed)
            std::cout << " [consistency: " << r.response_consistency.detail << "]";
        }
        std::cout << "\n";
      }
      std::cout << summary.robust << " robust, " << summary.rejected << " rejected\n";
      return summary.rejected == 0 ? 0 : 1;
    }

    if (synth->parsed()) {
      SeedPool seeds = load_seeds(cfg);
      ExemplarPool exemplars = load_exemplars(cfg);
      SynthesisRunStats stats = run_synthesis(cfg, registry, seeds, exemplars, nullptr);
      std::cout << "requested " << stats.requested << ", completed " << stats.completed
                << ", resumed past " << stats.skipped_existing << ", failed " << stats.failed
                << "\n"
                << "store: " << cfg.out_dir << "/tasks.jsonl\n";
      return stats.failed == 0 ? 0 : 1;
    }

    std::string store_path = o.store.empty() ? cfg.out_dir + "/tasks.jsonl" : o.store;
    std::vector<SynthesizedTask> tasks = load_task_store(store_path);

    if (verify->parsed()) {
      VerifySummary summary = verify_store(tasks, registry);
      std::cout << summary.total << " tasks, replay ok " << summary.replay_ok
                << ", toolset-confined " << summary.confined << "\n";
      return (summary.replay_ok == summary.total && summary.confined == summary.total) ? 0 : 1;
    }

    if (sft->parsed()) {
      auto teacher = make_solver(cfg, tasks);
      std::string out_path = cfg.out_dir + "/sft.jsonl";
      SftSummary summary = build_sft(tasks, *teacher, registry, oracle_judge(), out_path,
                                     attempts, cfg.turn_cap);
      std::cout << summary.accepted << "/" << summary.tasks << " trajectories accepted -> "
                << out_path << "\n";
      return 0;
    }

    if (rl->parsed()) {
      auto policy = make_solver(cfg, tasks);
      std::string out_path = cfg.out_dir + "/rl.jsonl";
      RlSummary summary = build_rl(tasks, *policy, registry, oracle_judge(), out_path, k_rl,
                                   lo, hi, cfg.turn_cap);
      std::cout << summary.kept << "/" << summary.tasks << " tasks kept -> " << out_path
                << "\n";
      return 0;
    }

    if (analyze->parsed()) {
      DiversityReport report = analyze_store(tasks, registry);
      std::cout << format_report(report);
      if (!json_out.empty()) {
        std::ofstream out(json_out, std::ios::binary);
        out << report_to_json(report).dump(2) << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == "ParseError" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
