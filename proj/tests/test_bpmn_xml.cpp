#include <doctest.h>

#include <random>

#include "bpmeval/bpmn_xml.hpp"
#include "bpmeval/prompts.hpp"
#include "support/generators.hpp"

using namespace bpmeval;

namespace {

int count_kind(const BpmnDocument& doc, const std::string& kind) {
  int n = 0;
  for (const auto& [id, k] : doc.element_index)
    if (k == kind) ++n;
  return n;
}

}  // namespace

TEST_SUITE_BEGIN("bpmn_xml");

TEST_CASE("chain converts to the expected elements") {
  const ProcessGraph g = parse_dot(
      "digraph g { START_NODE [shape=circle] t [shape=box label=\"Pay\"] "
      "END_NODE [shape=circle] START_NODE -> t -> END_NODE }");
  const BpmnDocument doc = to_bpmn_xml(g);
  CHECK(count_kind(doc, "startEvent") == 1);
  CHECK(count_kind(doc, "task") == 1);
  CHECK(count_kind(doc, "endEvent") == 1);
  CHECK(count_kind(doc, "sequenceFlow") == 2);
  CHECK(doc.xml.find("http://www.omg.org/spec/BPMN/20100524/MODEL") != std::string::npos);
  CHECK(doc.xml.find("name=\"Pay\"") != std::string::npos);
}

TEST_CASE("assisted-prompt sample graph yields 2 parallel gateways and 3 tasks") {
  const ProcessGraph g = parse_dot(prompts::kSyntaxReferenceDot);
  const BpmnDocument doc = to_bpmn_xml(g);
  CHECK(count_kind(doc, "parallelGateway") == 2);
  CHECK(count_kind(doc, "task") == 3);
  CHECK(count_kind(doc, "startEvent") == 1);
  CHECK(count_kind(doc, "endEvent") == 1);
  CHECK(count_kind(doc, "sequenceFlow") == 7);
}

TEST_CASE("empty graph produces an empty process that round-trips") {
  const ProcessGraph empty;
  const BpmnDocument doc = to_bpmn_xml(empty);
  CHECK(count_kind(doc, "process") == 1);
  CHECK(count_kind(doc, "sequenceFlow") == 0);
  CHECK(round_trip_check(empty).ok);
}

TEST_CASE("element counts are preserved one-to-one") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 50; ++i) {
    const ProcessGraph g = generators::random_process_graph(rng);
    const BpmnDocument doc = to_bpmn_xml(g);
    int activities = 0, and_gateways = 0, xor_gateways = 0, starts = 0, ends = 0;
    for (const auto& n : g.nodes) {
      if (n.type == NodeType::Activity) ++activities;
      else if (n.type == NodeType::StartEvent) ++starts;
      else if (n.type == NodeType::EndEvent) ++ends;
      else if (n.gateway_type == GatewayType::And) ++and_gateways;
      else ++xor_gateways;
    }
    CHECK(count_kind(doc, "task") == activities);
    CHECK(count_kind(doc, "parallelGateway") == and_gateways);
    CHECK(count_kind(doc, "exclusiveGateway") == xor_gateways);
    CHECK(count_kind(doc, "startEvent") == starts);
    CHECK(count_kind(doc, "endEvent") == ends);
    CHECK(count_kind(doc, "sequenceFlow") == (int)g.edges.size());
  }
}

TEST_CASE("round-trip holds across generated graphs with hostile labels") {
  std::mt19937_64 rng(67);
  for (int i = 0; i < 100; ++i) {
    generators::GraphGenOptions opts;
    opts.adversarial = true;
    const ProcessGraph g = generators::random_process_graph(rng, opts);
    const RoundTripResult rt = round_trip_check(g);
    CAPTURE(rt.reason);
    CHECK(rt.ok);
  }
}

TEST_CASE("round-trip preserves XML-reserved characters and lossy ids") {
  const ProcessGraph g = parse_dot(
      "digraph g {\n"
      "\"A<B & \\\"C\\\">\" [shape=box]\n"
      "\"my node\" [shape=box label=\"5% < 10% & 'ok'\"]\n"
      "\"my_node\" [shape=box]\n"
      "\"my node\" -> \"my_node\" [label=\"a&b\"]\n"
      "}");
  const RoundTripResult rt = round_trip_check(g);
  CAPTURE(rt.reason);
  CHECK(rt.ok);

  // the sanitized ids collide ("my node" vs "my_node") and must be suffixed
  const BpmnDocument doc = to_bpmn_xml(g);
  CHECK(doc.element_index.count("my_node"));
  CHECK(doc.element_index.count("my_node_2"));
}

TEST_CASE("edge labels survive the conversion") {
  const ProcessGraph g = parse_dot("digraph g { a -> b [label=\"approved\"] }");
  const ProcessGraph back = from_bpmn_xml(to_bpmn_xml(g));
  REQUIRE(back.edges.size() == 1);
  CHECK(back.edges[0].label == "approved");
}

TEST_CASE("hand-written minimal document parses to a two-node graph") {
  const std::string xml =
      "<?xml version=\"1.0\"?>\n"
      "<definitions xmlns=\"http://www.omg.org/spec/BPMN/20100524/MODEL\">\n"
      "  <process id=\"p\">\n"
      "    <startEvent id=\"s\"/>\n"
      "    <endEvent id=\"e\"/>\n"
      "    <sequenceFlow id=\"f\" sourceRef=\"s\" targetRef=\"e\"/>\n"
      "  </process>\n"
      "</definitions>\n";
  const ProcessGraph g = from_bpmn_xml(xml);
  REQUIRE(g.nodes.size() == 2);
  CHECK(g.nodes[0].type == NodeType::StartEvent);
  CHECK(g.nodes[1].type == NodeType::EndEvent);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].from == "s");
  CHECK(g.edges[0].to == "e");
}

TEST_CASE("foreign elements and broken references are parse errors") {
  CHECK_THROWS_AS(from_bpmn_xml("<definitions><process id=\"p\"><userTask id=\"u\"/>"
                                "</process></definitions>"),
                  ParseError);
  CHECK_THROWS_AS(from_bpmn_xml("<definitions><process id=\"p\">"
                                "<sequenceFlow id=\"f\" sourceRef=\"ghost\" targetRef=\"ghost\"/>"
                                "</process></definitions>"),
                  ParseError);
  CHECK_THROWS_AS(from_bpmn_xml("<html><body/></html>"), ParseError);
  CHECK_THROWS_AS(from_bpmn_xml(""), ParseError);
}

TEST_CASE("conversion rejects graphs with broken invariants") {
  ProcessGraph dup;
  dup.nodes.push_back({"a", NodeType::Activity, GatewayType::Xor, GatewayRole::Degenerate, "a"});
  dup.nodes.push_back({"a", NodeType::Activity, GatewayType::Xor, GatewayRole::Degenerate, "a"});
  CHECK_THROWS_AS(to_bpmn_xml(dup), ConversionError);

  ProcessGraph dangling;
  dangling.edges.push_back({"ghost", "ghost", ""});
  CHECK_THROWS_AS(to_bpmn_xml(dangling), ConversionError);
  CHECK_FALSE(round_trip_check(dangling).ok);
}

TEST_CASE("emission is deterministic") {
  const ProcessGraph g = parse_dot(prompts::kSyntaxReferenceDot);
  CHECK(to_bpmn_xml(g).xml == to_bpmn_xml(g).xml);
}

TEST_SUITE_END();
