#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bpmeval/dot.hpp"
#include "bpmeval/errors.hpp"

namespace bpmeval {

/// BPMN 2.0 XML text plus an id -> element-kind index over everything emitted.
struct BpmnDocument {
  std::string xml;
  std::map<std::string, std::string> element_index;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string xml_unescape(const std::string& s) {
  std::string out;
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    size_t semi = s.find(';', i);
    if (semi == std::string::npos) throw ParseError("bad XML entity");
    std::string ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      long code = std::stol(ent.substr(ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X') ? 2 : 1),
                            nullptr,
                            ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X') ? 16 : 10);
      if (code < 0 || code > 0x10FFFF) throw ParseError("bad character reference");
      // UTF-8 encode
      unsigned long cp = (unsigned long)code;
      if (cp < 0x80) out += (char)cp;
      else if (cp < 0x800) {
        out += (char)(0xC0 | (cp >> 6));
        out += (char)(0x80 | (cp & 0x3F));
      } else if (cp < 0x10000) {
        out += (char)(0xE0 | (cp >> 12));
        out += (char)(0x80 | ((cp >> 6) & 0x3F));
        out += (char)(0x80 | (cp & 0x3F));
      } else {
        out += (char)(0xF0 | (cp >> 18));
        out += (char)(0x80 | ((cp >> 12) & 0x3F));
        out += (char)(0x80 | ((cp >> 6) & 0x3F));
        out += (char)(0x80 | (cp & 0x3F));
      }
    } else {
      throw ParseError("unknown XML entity: " + ent);
    }
    i = semi + 1;
  }
  return out;
}

// NCName-safe id: non-alphanumerics become underscores, a leading digit or
// empty result gets an "n_" prefix.
inline std::string ncname(const std::string& id) {
  std::string out;
  for (unsigned char c : id) out += std::isalnum(c) ? (char)c : '_';
  if (out.empty() || std::isdigit((unsigned char)out[0])) out = "n_" + out;
  return out;
}

}  // namespace detail

/// Maps the process graph onto BPMN 2.0 XML: startEvent/endEvent, task
/// (name = label), parallelGateway/exclusiveGateway, sequenceFlow per edge.
/// One process, deterministic ids. When id sanitization is lossy, the
/// original DOT name rides along in an ext:dotId attribute so conversion
/// stays invertible.
inline BpmnDocument to_bpmn_xml(const ProcessGraph& g) {
  std::set<std::string> seen_ids;
  for (const auto& n : g.nodes)
    if (!seen_ids.insert(n.id).second)
      throw ConversionError("duplicate node id: " + n.id);
  for (const auto& e : g.edges)
    if (!seen_ids.count(e.from) || !seen_ids.count(e.to))
      throw ConversionError("edge references unknown node: " + e.from + " -> " + e.to);

  // Deterministic collision-suffixed XML ids.
  std::map<std::string, std::string> xml_id;
  std::set<std::string> used;
  for (const auto& n : g.nodes) {
    std::string base = detail::ncname(n.id);
    std::string candidate = base;
    int suffix = 2;
    while (!used.insert(candidate).second) candidate = base + "_" + std::to_string(suffix++);
    xml_id[n.id] = candidate;
  }

  BpmnDocument doc;
  std::string& x = doc.xml;
  x += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  x += "<definitions xmlns=\"http://www.omg.org/spec/BPMN/20100524/MODEL\"\n";
  x += "             xmlns:ext=\"urn:bpmeval:dot\"\n";
  x += "             id=\"definitions_1\" targetNamespace=\"urn:bpmeval:process\">\n";
  x += "  <process id=\"process_1\" isExecutable=\"false\">\n";
  doc.element_index["process_1"] = "process";

  for (const auto& n : g.nodes) {
    const std::string& id = xml_id.at(n.id);
    std::string kind;
    switch (n.type) {
      case NodeType::StartEvent: kind = "startEvent"; break;
      case NodeType::EndEvent: kind = "endEvent"; break;
      case NodeType::Activity: kind = "task"; break;
      case NodeType::Gateway:
        kind = n.gateway_type == GatewayType::And ? "parallelGateway" : "exclusiveGateway";
        break;
    }
    x += "    <" + kind + " id=\"" + detail::xml_escape(id) + "\"";
    if (id != n.id) x += " ext:dotId=\"" + detail::xml_escape(n.id) + "\"";
    if (n.type == NodeType::Activity) x += " name=\"" + detail::xml_escape(n.label) + "\"";
    x += "/>\n";
    doc.element_index[id] = kind;
  }

  int flow = 0;
  for (const auto& e : g.edges) {
    std::string id = "flow_" + std::to_string(++flow);
    x += "    <sequenceFlow id=\"" + id + "\" sourceRef=\"" +
         detail::xml_escape(xml_id.at(e.from)) + "\" targetRef=\"" +
         detail::xml_escape(xml_id.at(e.to)) + "\"";
    if (!e.label.empty()) x += " name=\"" + detail::xml_escape(e.label) + "\"";
    x += "/>\n";
    doc.element_index[id] = "sequenceFlow";
  }

  x += "  </process>\n";
  x += "</definitions>\n";
  return doc;
}

namespace detail {

struct XmlElement {
  std::string name;  // local name, prefix stripped
  std::map<std::string, std::string> attrs;
  bool self_closing = false;
  bool closing = false;
};

// Minimal pull-scanner for the BPMN subset this module emits: tags with
// attributes, declarations, comments; text content is ignored.
struct XmlScanner {
  const std::string& s;
  size_t i = 0;

  explicit XmlScanner(const std::string& text) : s(text) {}

  bool next(XmlElement& out) {
    for (;;) {
      while (i < s.size() && s[i] != '<') ++i;
      if (i >= s.size()) return false;
      if (s.compare(i, 4, "<!--") == 0) {
        size_t end = s.find("-->", i);
        if (end == std::string::npos) throw ParseError("unterminated XML comment");
        i = end + 3;
        continue;
      }
      if (s.compare(i, 2, "<?") == 0) {
        size_t end = s.find("?>", i);
        if (end == std::string::npos) throw ParseError("unterminated XML declaration");
        i = end + 2;
        continue;
      }
      break;
    }
    ++i;  // consume '<'
    out = XmlElement{};
    if (i < s.size() && s[i] == '/') {
      out.closing = true;
      ++i;
    }
    auto name_char = [](unsigned char c) {
      return std::isalnum(c) || c == '_' || c == '-' || c == ':' || c == '.';
    };
    std::string qname;
    while (i < s.size() && name_char((unsigned char)s[i])) qname += s[i++];
    if (qname.empty()) throw ParseError("malformed XML tag");
    size_t colon = qname.rfind(':');
    out.name = colon == std::string::npos ? qname : qname.substr(colon + 1);

    for (;;) {
      while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
      if (i >= s.size()) throw ParseError("unterminated XML tag");
      if (s[i] == '/') {
        out.self_closing = true;
        ++i;
        continue;
      }
      if (s[i] == '>') {
        ++i;
        return true;
      }
      std::string attr;
      while (i < s.size() && name_char((unsigned char)s[i])) attr += s[i++];
      if (attr.empty()) throw ParseError("malformed XML attribute");
      while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
      if (i >= s.size() || s[i] != '=') throw ParseError("XML attribute without value");
      ++i;
      while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
      if (i >= s.size() || (s[i] != '"' && s[i] != '\'')) throw ParseError("unquoted XML attribute");
      char quote = s[i++];
      std::string value;
      while (i < s.size() && s[i] != quote) value += s[i++];
      if (i >= s.size()) throw ParseError("unterminated XML attribute value");
      ++i;
      out.attrs[attr] = xml_unescape(value);
    }
  }
};

}  // namespace detail

/// Inverse of to_bpmn_xml. Foreign or unsupported elements inside the process
/// are ParseErrors; gateway roles are recomputed from the flows.
inline ProcessGraph from_bpmn_xml(const std::string& xml) {
  detail::XmlScanner scanner(xml);
  detail::XmlElement el;

  ProcessGraph g;
  struct Flow {
    std::string source, target, label;
  };
  std::vector<Flow> flows;
  std::map<std::string, std::string> id_to_dot;  // xml id -> dot id
  bool saw_definitions = false, saw_process = false, in_process = false;

  while (scanner.next(el)) {
    if (el.closing) {
      if (el.name == "process") in_process = false;
      continue;
    }
    if (el.name == "definitions") {
      saw_definitions = true;
      continue;
    }
    if (el.name == "process") {
      if (saw_process) throw ParseError("multiple process elements");
      saw_process = true;
      in_process = !el.self_closing;
      continue;
    }
    if (!in_process) throw ParseError("unexpected element outside process: " + el.name);

    auto attr = [&](const char* key) -> std::string {
      auto it = el.attrs.find(key);
      return it == el.attrs.end() ? "" : it->second;
    };
    const std::string xml_id = attr("id");

    if (el.name == "sequenceFlow") {
      Flow f;
      f.source = attr("sourceRef");
      f.target = attr("targetRef");
      f.label = attr("name");
      if (f.source.empty() || f.target.empty())
        throw ParseError("sequenceFlow without sourceRef/targetRef");
      flows.push_back(f);
      continue;
    }

    GraphNode n;
    if (el.name == "startEvent") {
      n.type = NodeType::StartEvent;
    } else if (el.name == "endEvent") {
      n.type = NodeType::EndEvent;
    } else if (el.name == "task") {
      n.type = NodeType::Activity;
    } else if (el.name == "parallelGateway") {
      n.type = NodeType::Gateway;
      n.gateway_type = GatewayType::And;
      n.label = "+";
    } else if (el.name == "exclusiveGateway") {
      n.type = NodeType::Gateway;
      n.gateway_type = GatewayType::Xor;
      n.label = "X";
    } else {
      throw ParseError("unsupported BPMN element: " + el.name);
    }
    if (xml_id.empty()) throw ParseError("flow node without id");

    std::string dot_id = xml_id;
    if (el.attrs.count("ext:dotId")) dot_id = el.attrs.at("ext:dotId");
    else if (el.attrs.count("dotId")) dot_id = el.attrs.at("dotId");
    n.id = dot_id;
    if (n.type == NodeType::Activity)
      n.label = el.attrs.count("name") ? el.attrs.at("name") : dot_id;
    if (id_to_dot.count(xml_id)) throw ParseError("duplicate element id: " + xml_id);
    id_to_dot[xml_id] = dot_id;
    if (g.find(dot_id)) throw ParseError("duplicate node name: " + dot_id);
    g.nodes.push_back(std::move(n));
  }

  if (!saw_definitions || !saw_process) throw ParseError("not a BPMN definitions document");

  for (const auto& f : flows) {
    auto src = id_to_dot.find(f.source);
    auto dst = id_to_dot.find(f.target);
    if (src == id_to_dot.end() || dst == id_to_dot.end())
      throw ParseError("sequenceFlow references missing element");
    g.edges.push_back({src->second, dst->second, f.label});
  }
  recompute_gateway_roles(g);
  return g;
}

inline ProcessGraph from_bpmn_xml(const BpmnDocument& doc) { return from_bpmn_xml(doc.xml); }

struct RoundTripResult {
  bool ok = false;
  std::string reason;
};

/// Converts to BPMN XML and back, then compares node multiset, edge multiset,
/// kinds and labels (orientation is not representable in BPMN and excluded).
inline RoundTripResult round_trip_check(const ProcessGraph& g) {
  RoundTripResult out;
  try {
    const ProcessGraph back = from_bpmn_xml(to_bpmn_xml(g));
    if (graphs_equal(g, back, /*include_orientation=*/false)) {
      out.ok = true;
    } else {
      out.reason = "round-tripped graph differs";
    }
  } catch (const std::exception& e) {
    out.reason = e.what();
  }
  return out;
}

}  // namespace bpmeval
