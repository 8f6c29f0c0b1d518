#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tasksynth/synthesis_engine.hpp"
#include "tasksynth/tool_registry.hpp"

namespace tasksynth {

struct GraphNode {
  std::string call_id;
  std::string tool_name;
  Primitive primitive = Primitive::Retrieval;
};

/// Dependency graph over a trajectory's successful tool calls. Edges point
/// from an earlier call to a later one (indices into `nodes`, from < to), so
/// the graph is acyclic by construction.
struct ToolCallGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t in_degree(std::size_t v) const;
  std::size_t out_degree(std::size_t v) const;
};

enum class StructureType { Single, Indep, Phain, Fork, Join, Dag, Mix };
enum class RpType { PureR, MixedRp, PureP };

std::string to_string(StructureType s);
std::string to_string(RpType rp);

struct TopologyClass {
  RpType rp = RpType::PureR;
  StructureType structure = StructureType::Single;
  std::optional<std::string> depth_bin;  // Phain/Fork/Join/Dag/Mix
  std::optional<std::string> width_bin;  // Fork/Join/Dag/Mix
  std::optional<std::string> node_bin;   // Indep
  std::string canonical_name;
};

struct DiversityReport {
  std::size_t tools_covered = 0;
  std::size_t unique_toolsets = 0;
  std::size_t unique_sequences = 0;
  std::size_t unique_graphs = 0;
  std::size_t unique_topologies = 0;
  std::size_t topology_classes_covered = 0;
  double avg_calls_per_task = 0.0;
  double distinct_tool_types_per_task = 0.0;
};

// ---- operations ----

/// Tool names in execution order, including repeats (failed calls included).
std::vector<std::string> extract_sequence(const RolloutTrace& trace);

/// External edge judge: maps a trace to proposed edges (indices over the
/// graph's nodes). Proposals violating the graph invariants are rejected.
using EdgeJudge =
    std::function<std::vector<std::pair<std::size_t, std::size_t>>(const RolloutTrace&)>;

/// Heuristic mode: edge i->j iff a normalized token of i's payload (length
/// >= 4, non-stopword) appears verbatim inside j's argument values.
ToolCallGraph build_call_graph(const RolloutTrace& trace, const Registry& registry);
ToolCallGraph build_call_graph(const RolloutTrace& trace, const Registry& registry,
                               const EdgeJudge& judge);

StructureType classify_structure(const ToolCallGraph& graph);

/// depth = node count of a longest directed path (single node -> 1);
/// width = largest layer, with layer(v) = 1 + max layer over predecessors.
std::pair<std::size_t, std::size_t> compute_scale(const ToolCallGraph& graph);

std::string depth_bin(std::size_t depth);
std::string width_bin(std::size_t width);
std::string node_bin(std::size_t nodes);

TopologyClass classify_topology(const ToolCallGraph& graph);

/// All 222 canonical class names in lexicographically stable order.
std::vector<std::string> enumerate_classes();
TopologyClass parse_class_name(const std::string& name);

// ---- corpus analysis ----

struct TraceRecord {
  std::vector<std::string> toolset;
  RolloutTrace trace;
};

/// Views a synthesized task's evidence as a trace for structural analysis.
TraceRecord record_from_task(const SynthesizedTask& task);

DiversityReport analyze_corpus(const std::vector<TraceRecord>& corpus,
                               const Registry& registry);

/// Per-class counts over the corpus (for density plots); only observed
/// classes appear.
std::map<std::string, std::size_t> class_histogram(const std::vector<TraceRecord>& corpus,
                                                   const Registry& registry);

/// Table-style text report mirroring the diversity metric labels.
std::string format_report(const DiversityReport& report);
json report_to_json(const DiversityReport& report);

}  // namespace tasksynth
