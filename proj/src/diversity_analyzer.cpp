#include "tasksynth/diversity_analyzer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tasksynth {

std::size_t ToolCallGraph::in_degree(std::size_t v) const {
  std::size_t d = 0;
  for (const auto& e : edges)
    if (e.second == v) ++d;
  return d;
}

std::size_t ToolCallGraph::out_degree(std::size_t v) const {
  std::size_t d = 0;
  for (const auto& e : edges)
    if (e.first == v) ++d;
  return d;
}

std::string to_string(StructureType s) {
  switch (s) {
    case StructureType::Single: return "Single";
    case StructureType::Indep: return "Indep";
    case StructureType::Phain: return "Phain";
    case StructureType::Fork: return "Fork";
    case StructureType::Join: return "Join";
    case StructureType::Dag: return "DAG";
    case StructureType::Mix: return "Mix";
  }
  return "Mix";
}

std::string to_string(RpType rp) {
  switch (rp) {
    case RpType::PureR: return "PureR";
    case RpType::MixedRp: return "R+P";
    case RpType::PureP: return "PureP";
  }
  return "R+P";
}

// ---- sequence extraction ----

std::vector<std::string> extract_sequence(const RolloutTrace& trace) {
  std::vector<std::string> out;
  for (const auto& s : trace.steps)
    if (s.action) out.push_back(s.action->tool_name);
  return out;
}

// ---- graph construction ----

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "this", "that", "with", "from", "have", "null", "true",  "false",
      "none", "data", "result", "results", "value", "values", "name", "type",
      "text", "item", "items", "string", "list", "info", "error", "status"};
  return words;
}

std::vector<std::string> payload_tokens(const std::string& payload) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 4 && !stopwords().count(cur)) tokens.push_back(cur);
    cur.clear();
  };
  for (char ch : payload) {
    if (std::isalnum(static_cast<unsigned char>(ch)))
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    else
      flush();
  }
  flush();
  return tokens;
}

void collect_arg_text(const json& v, std::string& out) {
  if (v.is_string()) {
    out += " " + v.get<std::string>();
  } else if (v.is_object() || v.is_array()) {
    for (const auto& e : v) collect_arg_text(e, out);
  } else if (!v.is_null()) {
    out += " " + v.dump();
  }
}

std::vector<GraphNode> graph_nodes(const RolloutTrace& trace, const Registry& registry,
                                   std::vector<const RolloutStep*>& ok_steps) {
  std::vector<GraphNode> nodes;
  for (const auto& s : trace.steps) {
    if (!s.action || !s.observation || s.observation->status != ObsStatus::Ok) continue;
    GraphNode n;
    n.call_id = s.action->call_id;
    n.tool_name = s.action->tool_name;
    n.primitive = registry.get(s.action->tool_name).primitive;
    nodes.push_back(std::move(n));
    ok_steps.push_back(&s);
  }
  return nodes;
}

}  // namespace

ToolCallGraph build_call_graph(const RolloutTrace& trace, const Registry& registry) {
  ToolCallGraph graph;
  std::vector<const RolloutStep*> steps;
  graph.nodes = graph_nodes(trace, registry, steps);

  std::vector<std::vector<std::string>> tokens(steps.size());
  std::vector<std::string> arg_text(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    tokens[i] = payload_tokens(steps[i]->observation->payload);
    std::string raw;
    collect_arg_text(steps[i]->action->arguments, raw);
    arg_text[i] = to_lower(raw);
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (std::size_t j = i + 1; j < steps.size(); ++j) {
      for (const auto& tok : tokens[i]) {
        if (arg_text[j].find(tok) != std::string::npos) {
          graph.edges.emplace_back(i, j);
          break;
        }
      }
    }
  }
  return graph;
}

ToolCallGraph build_call_graph(const RolloutTrace& trace, const Registry& registry,
                               const EdgeJudge& judge) {
  ToolCallGraph graph;
  std::vector<const RolloutStep*> steps;
  graph.nodes = graph_nodes(trace, registry, steps);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : judge(trace)) {
    if (e.first >= e.second || e.second >= graph.nodes.size())
      throw Error("InvalidEdgeSet",
                  "edge " + std::to_string(e.first) + "->" + std::to_string(e.second) +
                      " violates trajectory order");
    if (seen.insert(e).second) graph.edges.push_back(e);
  }
  return graph;
}

// ---- classification ----

StructureType classify_structure(const ToolCallGraph& graph) {
  const std::size_t n = graph.nodes.size();
  if (n == 0) throw Error("EmptyGraph", "cannot classify an empty graph");
  if (n == 1) return StructureType::Single;
  const std::size_t e = graph.edges.size();
  if (e == 0) return StructureType::Indep;

  std::size_t max_in = 0, max_out = 0, sources = 0, sinks = 0;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t in = graph.in_degree(v), out = graph.out_degree(v);
    max_in = std::max(max_in, in);
    max_out = std::max(max_out, out);
    if (in == 0) ++sources;
    if (out == 0) ++sinks;
  }
  if (e == n - 1 && max_in <= 1 && max_out <= 1) return StructureType::Phain;
  if (sources == 1 && sinks > 1 && max_in <= 1) return StructureType::Fork;
  if (sinks == 1 && sources > 1 && max_out <= 1) return StructureType::Join;
  if (max_in > 1 && max_out > 1) return StructureType::Dag;
  return StructureType::Mix;
}

std::pair<std::size_t, std::size_t> compute_scale(const ToolCallGraph& graph) {
  const std::size_t n = graph.nodes.size();
  if (n == 0) throw Error("EmptyGraph", "cannot scale an empty graph");
  // Longest-distance-from-source layering; edges always point forward, so a
  // single index pass settles every layer.
  std::vector<std::size_t> layer(n, 1);
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& e : graph.edges)
      if (e.second == v) layer[v] = std::max(layer[v], layer[e.first] + 1);
  std::map<std::size_t, std::size_t> counts;
  std::size_t depth = 0;
  for (std::size_t v = 0; v < n; ++v) {
    counts[layer[v]] += 1;
    depth = std::max(depth, layer[v]);
  }
  std::size_t width = 0;
  for (const auto& [l, c] : counts) width = std::max(width, c);
  return {depth, width};
}

std::string depth_bin(std::size_t depth) {
  if (depth <= 2) return "d1-2";
  if (depth <= 4) return "d3-4";
  if (depth <= 7) return "d5-7";
  return "d8+";
}

std::string width_bin(std::size_t width) {
  if (width <= 2) return "w1-2";
  if (width <= 5) return "w3-5";
  if (width <= 10) return "w6-10";
  return "w11+";
}

std::string node_bin(std::size_t nodes) {
  if (nodes <= 3) return "n2-3";
  if (nodes <= 6) return "n4-6";
  if (nodes <= 10) return "n7-10";
  if (nodes <= 20) return "n11-20";
  return "n21+";
}

TopologyClass classify_topology(const ToolCallGraph& graph) {
  if (graph.nodes.empty()) throw Error("EmptyGraph", "cannot classify an empty graph");
  TopologyClass cls;
  bool any_r = false, any_p = false;
  for (const auto& node : graph.nodes)
    (node.primitive == Primitive::Retrieval ? any_r : any_p) = true;
  cls.rp = any_r && any_p ? RpType::MixedRp : (any_r ? RpType::PureR : RpType::PureP);
  cls.structure = classify_structure(graph);

  std::string name = to_string(cls.rp) + "/" + to_string(cls.structure);
  switch (cls.structure) {
    case StructureType::Single:
      break;
    case StructureType::Indep:
      cls.node_bin = node_bin(graph.nodes.size());
      name += "/" + *cls.node_bin;
      break;
    case StructureType::Phain: {
      auto [d, w] = compute_scale(graph);
      (void)w;
      cls.depth_bin = depth_bin(d);
      name += "/" + *cls.depth_bin;
      break;
    }
    default: {
      auto [d, w] = compute_scale(graph);
      cls.depth_bin = depth_bin(d);
      cls.width_bin = width_bin(w);
      name += "/" + *cls.depth_bin + "/" + *cls.width_bin;
      break;
    }
  }
  cls.canonical_name = name;
  return cls;
}

// ---- taxonomy enumeration ----

namespace {

const std::vector<std::string>& depth_bins() {
  static const std::vector<std::string> v = {"d1-2", "d3-4", "d5-7", "d8+"};
  return v;
}
const std::vector<std::string>& width_bins() {
  static const std::vector<std::string> v = {"w1-2", "w3-5", "w6-10", "w11+"};
  return v;
}
const std::vector<std::string>& node_bins() {
  static const std::vector<std::string> v = {"n2-3", "n4-6", "n7-10", "n11-20", "n21+"};
  return v;
}

}  // namespace

std::vector<std::string> enumerate_classes() {
  std::vector<std::string> names;
  const RpType rps[] = {RpType::PureR, RpType::MixedRp, RpType::PureP};
  for (RpType rp : rps) {
    const std::string base = to_string(rp) + "/";
    names.push_back(base + "Single");
    for (const auto& nb : node_bins()) names.push_back(base + "Indep/" + nb);
    for (const auto& db : depth_bins()) names.push_back(base + "Phain/" + db);
    for (const char* st : {"Fork", "Join", "DAG", "Mix"})
      for (const auto& db : depth_bins())
        for (const auto& wb : width_bins())
          names.push_back(base + st + "/" + db + "/" + wb);
  }
  std::sort(names.begin(), names.end());
  return names;
}

TopologyClass parse_class_name(const std::string& name) {
  std::vector<std::string> parts;
  std::stringstream ss(name);
  std::string part;
  while (std::getline(ss, part, '/')) parts.push_back(part);
  if (parts.size() < 2) throw Error("ParseError", "malformed class name '" + name + "'");

  TopologyClass cls;
  if (parts[0] == "PureR") cls.rp = RpType::PureR;
  else if (parts[0] == "R+P") cls.rp = RpType::MixedRp;
  else if (parts[0] == "PureP") cls.rp = RpType::PureP;
  else throw Error("ParseError", "unknown R/P type in '" + name + "'");

  const std::string& st = parts[1];
  auto expect_parts = [&](std::size_t n) {
    if (parts.size() != n) throw Error("ParseError", "malformed class name '" + name + "'");
  };
  if (st == "Single") { cls.structure = StructureType::Single; expect_parts(2); }
  else if (st == "Indep") { cls.structure = StructureType::Indep; expect_parts(3); cls.node_bin = parts[2]; }
  else if (st == "Phain") { cls.structure = StructureType::Phain; expect_parts(3); cls.depth_bin = parts[2]; }
  else {
    if (st == "Fork") cls.structure = StructureType::Fork;
    else if (st == "Join") cls.structure = StructureType::Join;
    else if (st == "DAG") cls.structure = StructureType::Dag;
    else if (st == "Mix") cls.structure = StructureType::Mix;
    else throw Error("ParseError", "unknown structure in '" + name + "'");
    expect_parts(4);
    cls.depth_bin = parts[2];
    cls.width_bin = parts[3];
  }
  cls.canonical_name = name;
  return cls;
}

// ---- corpus analysis ----

TraceRecord record_from_task(const SynthesizedTask& task) {
  TraceRecord rec;
  rec.toolset = task.toolset;
  for (const auto& item : task.evidence.items)
    rec.trace.steps.push_back({"", item.action, item.observation});
  rec.trace.budget_used = static_cast<int>(task.evidence.items.size());
  return rec;
}

namespace {

std::string canonical_graph_key(const ToolCallGraph& g, bool abstract_rp) {
  // call_ids deliberately excluded so relabeling never changes the key
  std::ostringstream os;
  for (const auto& n : g.nodes)
    os << (abstract_rp ? (n.primitive == Primitive::Retrieval ? "R" : "P")
                       : n.tool_name)
       << ";";
  os << "|";
  for (const auto& e : g.edges) os << e.first << "-" << e.second << ",";
  return os.str();
}

}  // namespace

DiversityReport analyze_corpus(const std::vector<TraceRecord>& corpus,
                               const Registry& registry) {
  DiversityReport report;
  std::set<std::string> tools, toolsets, sequences, graphs, topologies, classes;
  std::size_t tasks_with_calls = 0, total_calls = 0, total_distinct = 0;

  for (const auto& rec : corpus) {
    std::vector<std::string> sorted_toolset = rec.toolset;
    std::sort(sorted_toolset.begin(), sorted_toolset.end());
    std::string ts_key;
    for (const auto& t : sorted_toolset) ts_key += t + ";";
    toolsets.insert(ts_key);

    auto seq = extract_sequence(rec.trace);
    if (seq.empty()) continue;
    ++tasks_with_calls;
    total_calls += seq.size();
    std::set<std::string> distinct(seq.begin(), seq.end());
    total_distinct += distinct.size();
    for (const auto& t : seq) tools.insert(t);
    std::string seq_key;
    for (const auto& t : seq) seq_key += t + ";";
    sequences.insert(seq_key);

    ToolCallGraph g = build_call_graph(rec.trace, registry);
    if (g.nodes.empty()) continue;
    graphs.insert(canonical_graph_key(g, false));
    topologies.insert(canonical_graph_key(g, true));
    classes.insert(classify_topology(g).canonical_name);
  }

  report.tools_covered = tools.size();
  report.unique_toolsets = toolsets.size();
  report.unique_sequences = sequences.size();
  report.unique_graphs = graphs.size();
  report.unique_topologies = topologies.size();
  report.topology_classes_covered = classes.size();
  if (tasks_with_calls > 0) {
    report.avg_calls_per_task = static_cast<double>(total_calls) / tasks_with_calls;
    report.distinct_tool_types_per_task =
        static_cast<double>(total_distinct) / tasks_with_calls;
  }
  return report;
}

std::map<std::string, std::size_t> class_histogram(const std::vector<TraceRecord>& corpus,
                                                   const Registry& registry) {
  std::map<std::string, std::size_t> hist;
  for (const auto& rec : corpus) {
    ToolCallGraph g = build_call_graph(rec.trace, registry);
    if (g.nodes.empty()) continue;
    hist[classify_topology(g).canonical_name] += 1;
  }
  return hist;
}

std::string format_report(const DiversityReport& r) {
  std::ostringstream os;
  os << "Tools covered                 " << r.tools_covered << "\n"
     << "Unique toolsets               " << r.unique_toolsets << "\n"
     << "Unique tool-call sequences    " << r.unique_sequences << "\n"
     << "Unique tool-call graphs       " << r.unique_graphs << "\n"
     << "Unique R/P topologies         " << r.unique_topologies << "\n"
     << "R/P topology classes covered  " << r.topology_classes_covered << "\n"
     << "Avg. tool calls per task      " << r.avg_calls_per_task << "\n"
     << "Distinct tool types per task  " << r.distinct_tool_types_per_task << "\n";
  return os.str();
}

json report_to_json(const DiversityReport& r) {
  json j;
  j["tools_covered"] = r.tools_covered;
  j["unique_toolsets"] = r.unique_toolsets;
  j["unique_sequences"] = r.unique_sequences;
  j["unique_graphs"] = r.unique_graphs;
  j["unique_topologies"] = r.unique_topologies;
  j["topology_classes_covered"] = r.topology_classes_covered;
  j["avg_calls_per_task"] = r.avg_calls_per_task;
  j["distinct_tool_types_per_task"] = r.distinct_tool_types_per_task;
  return j;
}

}  // namespace tasksynth
