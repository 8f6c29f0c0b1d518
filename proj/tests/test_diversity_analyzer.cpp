#include <doctest.h>

#include <algorithm>
#include <set>

#include "tasksynth/diversity_analyzer.hpp"

using namespace tasksynth;

namespace {

Registry rp_registry() {
  Registry reg;
  auto add = [&](const std::string& name, Primitive prim) {
    ToolSpec t;
    t.name = name;
    t.primitive = prim;
    t.backend.kind = Backend::Kind::Builtin;
    t.backend.builtin = "mock_echo";
    reg.register_tool(t);
  };
  add("r1", Primitive::Retrieval);
  add("r2", Primitive::Retrieval);
  add("p1", Primitive::Processing);
  add("p2", Primitive::Processing);
  return reg;
}

RolloutStep ok_step(const std::string& tool, const json& args, const std::string& payload,
                    const std::string& call_id) {
  return {"", ToolCall{tool, args, call_id}, Observation{call_id, ObsStatus::Ok, payload, {}}};
}

/// A graph over anonymous nodes with chosen primitives; edges given directly.
ToolCallGraph make_graph(const std::string& prims,
                         std::vector<std::pair<std::size_t, std::size_t>> edges) {
  ToolCallGraph g;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    GraphNode n;
    n.call_id = "n" + std::to_string(i);
    n.tool_name = prims[i] == 'R' ? "r1" : "p1";
    n.primitive = prims[i] == 'R' ? Primitive::Retrieval : Primitive::Processing;
    g.nodes.push_back(n);
  }
  g.edges = std::move(edges);
  return g;
}

}  // namespace

TEST_CASE("sequences include repeated and failed calls") {
  RolloutTrace trace;
  trace.steps.push_back(ok_step("r1", {{"q", "a"}}, "x", "c1"));
  trace.steps.push_back({"", ToolCall{"p1", json::object(), "c2"},
                         Observation{"c2", ObsStatus::ToolError, "ArgumentMismatch: x", {}}});
  trace.steps.push_back(ok_step("r1", {{"q", "b"}}, "y", "c3"));
  trace.steps.push_back({"finished", std::nullopt, std::nullopt});
  CHECK(extract_sequence(trace) == std::vector<std::string>{"r1", "p1", "r1"});
}

TEST_CASE("heuristic edges follow payload tokens into later arguments") {
  Registry reg = rp_registry();
  RolloutTrace trace;
  trace.steps.push_back(ok_step("r1", {{"q", "start"}}, "found id=XYZ9 here", "c1"));
  trace.steps.push_back(ok_step("p1", {{"text", "expand XYZ9 please"}}, "done", "c2"));
  trace.steps.push_back(ok_step("p2", {{"text", "unrelated probe"}}, "fin", "c3"));
  ToolCallGraph g = build_call_graph(trace, reg);
  REQUIRE(g.nodes.size() == 3);
  // "xyz9" links c1 to c2 (case-insensitively); "found"/"here" miss c3
  CHECK(g.edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
}

TEST_CASE("short tokens and stopwords never create edges, and failed calls are dropped") {
  Registry reg = rp_registry();
  RolloutTrace trace;
  trace.steps.push_back(ok_step("r1", {{"q", "a"}}, "ok we got that result", "c1"));
  trace.steps.push_back({"", ToolCall{"r2", {{"q", "that result ok"}}, "c2"},
                         Observation{"c2", ObsStatus::ToolError, "boom", {}}});
  trace.steps.push_back(ok_step("p1", {{"text", "that result we need"}}, "done", "c3"));
  ToolCallGraph g = build_call_graph(trace, reg);
  CHECK(g.nodes.size() == 2);  // the failed r2 call is not a node
  CHECK(g.edges.empty());      // "that"/"result" are stopwords, "we"/"ok"/"got" too short
}

TEST_CASE("an external edge judge is validated against trajectory order") {
  Registry reg = rp_registry();
  RolloutTrace trace;
  trace.steps.push_back(ok_step("r1", {{"q", "a"}}, "x", "c1"));
  trace.steps.push_back(ok_step("p1", {{"text", "b"}}, "y", "c2"));

  ToolCallGraph g = build_call_graph(trace, reg, [](const RolloutTrace&) {
    return std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 1}};
  });
  CHECK(g.edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});  // deduped

  auto backward = [](const RolloutTrace&) {
    return std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}};
  };
  CHECK_THROWS_AS(build_call_graph(trace, reg, backward), Error);
  auto out_of_range = [](const RolloutTrace&) {
    return std::vector<std::pair<std::size_t, std::size_t>>{{0, 5}};
  };
  CHECK_THROWS_AS(build_call_graph(trace, reg, out_of_range), Error);
}

TEST_CASE("structure classification follows the priority rules") {
  CHECK(classify_structure(make_graph("R", {})) == StructureType::Single);
  CHECK(classify_structure(make_graph("RR", {})) == StructureType::Indep);
  CHECK(classify_structure(make_graph("RPP", {{0, 1}, {1, 2}})) == StructureType::Phain);
  // star: one source, many sinks
  CHECK(classify_structure(make_graph("RPPP", {{0, 1}, {0, 2}, {0, 3}})) ==
        StructureType::Fork);
  // mirror star: many sources, one sink
  CHECK(classify_structure(make_graph("RRRP", {{0, 3}, {1, 3}, {2, 3}})) ==
        StructureType::Join);
  // diamond: reconvergent paths
  CHECK(classify_structure(make_graph("RRRP", {{0, 1}, {0, 2}, {1, 3}, {2, 3}})) ==
        StructureType::Dag);
  // a join plus an isolated node fits none of the shapes
  CHECK(classify_structure(make_graph("RRPP", {{0, 2}, {1, 2}})) == StructureType::Mix);
  CHECK_THROWS_AS(classify_structure(make_graph("", {})), Error);
}

TEST_CASE("scale measures longest path depth and widest layer") {
  auto scale = [](const ToolCallGraph& g) { return compute_scale(g); };
  CHECK(scale(make_graph("R", {})) == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(scale(make_graph("RRR", {})) == std::pair<std::size_t, std::size_t>{1, 3});
  CHECK(scale(make_graph("RPP", {{0, 1}, {1, 2}})) ==
        std::pair<std::size_t, std::size_t>{3, 1});
  CHECK(scale(make_graph("RPPP", {{0, 1}, {0, 2}, {0, 3}})) ==
        std::pair<std::size_t, std::size_t>{2, 3});
  CHECK(scale(make_graph("RRRP", {{0, 1}, {0, 2}, {1, 3}, {2, 3}})) ==
        std::pair<std::size_t, std::size_t>{3, 2});
}

TEST_CASE("bin boundaries") {
  CHECK(depth_bin(1) == "d1-2");
  CHECK(depth_bin(2) == "d1-2");
  CHECK(depth_bin(3) == "d3-4");
  CHECK(depth_bin(4) == "d3-4");
  CHECK(depth_bin(5) == "d5-7");
  CHECK(depth_bin(7) == "d5-7");
  CHECK(depth_bin(8) == "d8+");
  CHECK(depth_bin(100) == "d8+");
  CHECK(width_bin(2) == "w1-2");
  CHECK(width_bin(3) == "w3-5");
  CHECK(width_bin(5) == "w3-5");
  CHECK(width_bin(6) == "w6-10");
  CHECK(width_bin(10) == "w6-10");
  CHECK(width_bin(11) == "w11+");
  CHECK(node_bin(2) == "n2-3");
  CHECK(node_bin(3) == "n2-3");
  CHECK(node_bin(4) == "n4-6");
  CHECK(node_bin(6) == "n4-6");
  CHECK(node_bin(7) == "n7-10");
  CHECK(node_bin(10) == "n7-10");
  CHECK(node_bin(11) == "n11-20");
  CHECK(node_bin(20) == "n11-20");
  CHECK(node_bin(21) == "n21+");
}

TEST_CASE("canonical class names assemble per structure family") {
  CHECK(classify_topology(make_graph("R", {})).canonical_name == "PureR/Single");
  CHECK(classify_topology(make_graph("RRPP", {})).canonical_name == "R+P/Indep/n4-6");
  CHECK(classify_topology(make_graph("PPP", {{0, 1}, {1, 2}})).canonical_name ==
        "PureP/Phain/d3-4");
  // depth 5, width 3, reconvergent: 0->{1,2,3}, {1,2}->4, 4->5->6
  CHECK(classify_topology(make_graph(
                              "RPRPRPR",
                              {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {4, 5}, {5, 6}}))
            .canonical_name == "R+P/DAG/d5-7/w3-5");
  CHECK(classify_topology(make_graph("RPPP", {{0, 1}, {0, 2}, {0, 3}})).canonical_name ==
        "R+P/Fork/d1-2/w3-5");
}

TEST_CASE("the taxonomy enumerates exactly the expected classes") {
  auto names = enumerate_classes();
  CHECK(names.size() == 222);
  std::set<std::string> uniq(names.begin(), names.end());
  CHECK(uniq.size() == 222);
  CHECK(std::is_sorted(names.begin(), names.end()));

  auto count_with = [&](const std::string& part) {
    std::size_t n = 0;
    for (const auto& name : names)
      if (name.find(part) != std::string::npos) ++n;
    return n;
  };
  CHECK(count_with("/Single") == 3);
  CHECK(count_with("/Indep/") == 15);
  CHECK(count_with("/Phain/") == 12);
  CHECK(count_with("/Fork/") == 48);
  CHECK(count_with("/Join/") == 48);
  CHECK(count_with("/DAG/") == 48);
  CHECK(count_with("/Mix/") == 48);
  CHECK(count_with("PureR/") == 74);
  CHECK(count_with("PureP/") == 74);
  CHECK(count_with("R+P/") == 74);
  CHECK(uniq.count("PureR/Single") == 1);
  CHECK(uniq.count("R+P/Indep/n4-6") == 1);
  CHECK(uniq.count("PureP/Phain/d3-4") == 1);
  CHECK(uniq.count("R+P/DAG/d5-7/w3-5") == 1);
}

TEST_CASE("class names parse back to their components") {
  for (const auto& name : enumerate_classes()) {
    TopologyClass cls = parse_class_name(name);
    CHECK(cls.canonical_name == name);
    std::string rebuilt = to_string(cls.rp) + "/" + to_string(cls.structure);
    if (cls.node_bin) rebuilt += "/" + *cls.node_bin;
    if (cls.depth_bin) rebuilt += "/" + *cls.depth_bin;
    if (cls.width_bin) rebuilt += "/" + *cls.width_bin;
    CHECK(rebuilt == name);
  }
  CHECK_THROWS_AS(parse_class_name("PureR"), Error);
  CHECK_THROWS_AS(parse_class_name("PureX/Single"), Error);
  CHECK_THROWS_AS(parse_class_name("PureR/Single/extra"), Error);
  CHECK_THROWS_AS(parse_class_name("PureR/Fork/d1-2"), Error);
}

namespace {

std::vector<TraceRecord> frozen_corpus() {
  std::vector<TraceRecord> corpus;
  auto add = [&](std::vector<std::string> toolset, std::vector<RolloutStep> steps) {
    TraceRecord rec;
    rec.toolset = std::move(toolset);
    rec.trace.steps = std::move(steps);
    corpus.push_back(std::move(rec));
  };
  // 1: lone retrieval -> PureR/Single
  add({"r1", "r2"}, {ok_step("r1", {{"q", "start"}}, "independent entry one", "t1c1")});
  // 2: retrieval feeding a processor -> R+P/Phain/d1-2
  add({"r1", "p1"}, {ok_step("r1", {{"q", "seed"}}, "found marker alphatok", "t2c1"),
                     ok_step("p1", {{"text", "use alphatok"}}, "ok", "t2c2")});
  // 3: same calls, different ids and toolset order -> dedups everywhere
  add({"p1", "r1"}, {ok_step("r1", {{"q", "seed"}}, "found marker alphatok", "t3c1"),
                     ok_step("p1", {{"text", "use alphatok"}}, "ok", "t3c2")});
  // 4: two unlinked retrievals -> PureR/Indep/n2-3
  add({"r1", "r2"}, {ok_step("r2", {{"q", "aaa"}}, "zz qq", "t4c1"),
                     ok_step("r2", {{"q", "bbb"}}, "yy", "t4c2")});
  // 5: one retrieval fanned into two processors -> R+P/Fork/d1-2/w1-2
  add({"r1", "p1", "p2"},
      {ok_step("r1", {{"q", "fan"}}, "betatok and gammatok", "t5c1"),
       ok_step("p1", {{"text", "betatok"}}, "ok", "t5c2"),
       ok_step("p2", {{"text", "gammatok"}}, "fin", "t5c3")});
  // 6: three-step chain -> R+P/Phain/d3-4
  add({"r1", "r2", "p1"},
      {ok_step("r1", {{"q", "deep"}}, "deltatok found", "t6c1"),
       ok_step("r2", {{"q", "deltatok"}}, "epsilontok rec", "t6c2"),
       ok_step("p1", {{"text", "epsilontok"}}, "fin", "t6c3")});
  return corpus;
}

}  // namespace

TEST_CASE("corpus analysis over the frozen six-trace fixture") {
  Registry reg = rp_registry();
  auto corpus = frozen_corpus();
  DiversityReport r = analyze_corpus(corpus, reg);
  CHECK(r.tools_covered == 4);
  CHECK(r.unique_toolsets == 4);
  CHECK(r.unique_sequences == 5);
  CHECK(r.unique_graphs == 5);
  CHECK(r.unique_topologies == 5);
  CHECK(r.topology_classes_covered == 5);
  CHECK(r.avg_calls_per_task == doctest::Approx(13.0 / 6.0));
  CHECK(r.distinct_tool_types_per_task == doctest::Approx(2.0));

  auto hist = class_histogram(corpus, reg);
  CHECK(hist.at("PureR/Single") == 1);
  CHECK(hist.at("R+P/Phain/d1-2") == 2);
  CHECK(hist.at("PureR/Indep/n2-3") == 1);
  CHECK(hist.at("R+P/Fork/d1-2/w1-2") == 1);
  CHECK(hist.at("R+P/Phain/d3-4") == 1);

  std::string text = format_report(r);
  CHECK(text.find("Tools covered") != std::string::npos);
  CHECK(text.find("R/P topology classes covered  5") != std::string::npos);
  json j = report_to_json(r);
  CHECK(j["unique_graphs"] == 5);
}

TEST_CASE("tasks convert to analyzable trace records") {
  SynthesizedTask task;
  task.toolset = {"r1", "p1"};
  ToolCall call{"r1", {{"q", "x"}}, "c1"};
  Observation obs{"c1", ObsStatus::Ok, "payload", {}};
  task.evidence.items.push_back({call, obs, 1, 1});
  TraceRecord rec = record_from_task(task);
  CHECK(rec.toolset == task.toolset);
  REQUIRE(rec.trace.steps.size() == 1);
  CHECK(rec.trace.steps[0].action->tool_name == "r1");
  CHECK(rec.trace.steps[0].observation->payload == "payload");
}
