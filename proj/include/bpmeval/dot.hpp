#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "bpmeval/errors.hpp"

namespace bpmeval {

enum class NodeType { StartEvent, EndEvent, Activity, Gateway };
enum class GatewayType { And, Xor };
enum class GatewayRole { Split, Join, Degenerate };

struct GraphNode {
  std::string id;
  NodeType type = NodeType::Activity;
  GatewayType gateway_type = GatewayType::Xor;   // meaningful only for gateways
  GatewayRole gateway_role = GatewayRole::Degenerate;
  std::string label;

  bool is_gateway() const { return type == NodeType::Gateway; }
  bool is_event() const {
    return type == NodeType::StartEvent || type == NodeType::EndEvent;
  }
};

struct GraphEdge {
  std::string from;
  std::string to;
  std::string label;  // empty = unlabeled
};

/// A BPMN process encoded as a DOT digraph: typed nodes, directed flows,
/// optional rank direction.
struct ProcessGraph {
  std::vector<GraphNode> nodes;  // declaration order
  std::vector<GraphEdge> edges;  // declaration order
  std::optional<std::string> orientation;

  bool empty() const { return nodes.empty() && edges.empty(); }
  const GraphNode* find(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
};

struct GraphStats {
  int node_count = 0;
  int edge_count = 0;
  int gateway_count = 0;
};

inline GatewayRole role_from_degrees(int in_degree, int out_degree) {
  if (out_degree > 1) return GatewayRole::Split;
  if (in_degree > 1) return GatewayRole::Join;
  return GatewayRole::Degenerate;
}

/// Re-derives every gateway's split/join role from the current edge set.
inline void recompute_gateway_roles(ProcessGraph& g) {
  std::map<std::string, std::pair<int, int>> degrees;  // id -> (in, out)
  for (const auto& e : g.edges) {
    degrees[e.from].second++;
    degrees[e.to].first++;
  }
  for (auto& n : g.nodes) {
    if (!n.is_gateway()) continue;
    auto [in, out] = degrees[n.id];
    n.gateway_role = role_from_degrees(in, out);
  }
}

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline bool ci_equal(const std::string& a, const char* b) {
  return lower(a) == lower(b);
}

inline bool ci_starts_with(const std::string& s, const char* prefix) {
  return lower(s).rfind(lower(prefix), 0) == 0;
}

// Positions of characters that sit inside double-quoted strings, honoring
// backslash escapes. Sanitizer transforms must never touch quoted content.
inline std::vector<bool> quoted_mask(const std::string& s) {
  std::vector<bool> mask(s.size(), false);
  bool in_quote = false;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_quote) {
      mask[i] = true;
      if (c == '\\' && i + 1 < s.size()) {
        mask[++i] = true;
      } else if (c == '"') {
        in_quote = false;
      }
    } else if (c == '"') {
      mask[i] = true;
      in_quote = true;
    }
  }
  return mask;
}

}  // namespace detail

namespace detail {

inline std::string sanitize_pass(const std::string& raw) {
  // Drop code-fence lines wholesale; trailing whitespace they leave behind
  // goes with them.
  std::string text;
  {
    bool dropped = false;
    size_t pos = 0;
    while (pos < raw.size()) {
      size_t nl = raw.find('\n', pos);
      size_t end = nl == std::string::npos ? raw.size() : nl + 1;
      std::string line = raw.substr(pos, end - pos);
      std::string bare = line;
      if (!bare.empty() && bare.back() == '\n') bare.pop_back();
      if (detail::trim(bare).rfind("```", 0) == 0)
        dropped = true;
      else
        text += line;
      pos = end;
    }
    if (dropped) {
      size_t e = text.find_last_not_of(" \t\r\n");
      text = e == std::string::npos ? "" : text.substr(0, e + 1);
    }
  }

  // Collapse duplicated outer braces: "{ { body } }" -> "{ body }".
  for (;;) {
    auto mask = detail::quoted_mask(text);
    size_t first = std::string::npos;
    for (size_t i = 0; i < text.size(); ++i)
      if (text[i] == '{' && !mask[i]) {
        first = i;
        break;
      }
    if (first == std::string::npos) break;
    size_t second = first + 1;
    while (second < text.size() && std::isspace((unsigned char)text[second])) ++second;
    if (second >= text.size() || text[second] != '{' || mask[second]) break;
    size_t last = std::string::npos;
    for (size_t i = text.size(); i-- > 0;)
      if (text[i] == '}' && !mask[i]) {
        last = i;
        break;
      }
    if (last == std::string::npos || last <= second) break;
    size_t second_last = last;
    bool found = false;
    for (size_t i = last; i-- > second;) {
      if (std::isspace((unsigned char)text[i])) continue;
      if (text[i] == '}' && !mask[i]) {
        second_last = i;
        found = true;
      }
      break;
    }
    if (!found) break;
    text.erase(second_last, 1);
    text.erase(second, 1);
  }

  // Trailing commas inside attribute lists: ",]" -> "]".
  {
    std::string out;
    auto mask = detail::quoted_mask(text);
    for (size_t i = 0; i < text.size(); ++i) {
      if (text[i] == ',' && !mask[i]) {
        size_t j = i + 1;
        while (j < text.size() && std::isspace((unsigned char)text[j])) ++j;
        if (j < text.size() && text[j] == ']' && !mask[j]) continue;
      }
      out += text[i];
    }
    text = out;
  }

  // Dangling empty attribute values: "label=]" / "label=," -> label=""].
  {
    std::string out;
    auto mask = detail::quoted_mask(text);
    for (size_t i = 0; i < text.size(); ++i) {
      out += text[i];
      if (text[i] == '=' && !mask[i]) {
        size_t j = i + 1;
        while (j < text.size() && std::isspace((unsigned char)text[j])) ++j;
        if (j >= text.size() || ((text[j] == ',' || text[j] == ']') && !mask[j]))
          out += "\"\"";
      }
    }
    text = out;
  }

  // Top-level brace balance: drop trailing surplus closers, append missing
  // ones. An unterminated quote makes the depth meaningless, so that case
  // passes through untouched.
  {
    auto mask = detail::quoted_mask(text);
    bool quote_open = false;
    for (size_t i = 0; i < text.size(); ++i) {
      char c = text[i];
      if (quote_open) {
        if (c == '\\' && i + 1 < text.size()) ++i;
        else if (c == '"') quote_open = false;
      } else if (c == '"') {
        quote_open = true;
      }
    }
    if (!quote_open) {
      long depth = 0;
      for (size_t i = 0; i < text.size(); ++i) {
        if (mask[i]) continue;
        if (text[i] == '{') ++depth;
        if (text[i] == '}') --depth;
      }
      while (depth < 0) {
        size_t i = text.find_last_not_of(" \t\r\n");
        if (i == std::string::npos || text[i] != '}' || mask[i]) break;
        text.erase(i, 1);
        mask.erase(mask.begin() + (long)i);
        ++depth;
      }
      if (depth > 0) {
        bool had_newline = !text.empty() && text.back() == '\n';
        if (had_newline) text.pop_back();
        text.append((size_t)depth, '}');
        if (had_newline) text += '\n';
      }
    }
  }

  return text;
}

}  // namespace detail

/// Best-effort cleanup of model-emitted DOT. Whitelisted repairs only:
/// Markdown fences, duplicated outer braces, trailing brace surplus/deficit,
/// trailing commas in attribute lists, dangling empty attribute values.
/// Repairs can expose one another, so the pass runs to a fixed point. Total
/// and idempotent; anything else passes through untouched so parse failures
/// stay observable.
inline std::string sanitize_dot(const std::string& raw) {
  std::string text = raw;
  for (int round = 0; round < 32; ++round) {
    std::string next = detail::sanitize_pass(text);
    if (next == text) break;
    text = std::move(next);
  }
  return text;
}

namespace detail {

enum class TokKind { Ident, Arrow, LBrace, RBrace, LBracket, RBracket, Equals, Comma, Semi, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  bool quoted = false;
};

inline bool is_bare_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '.' || c >= 0x80;
}

inline std::vector<Token> lex_dot(const std::string& s) {
  std::vector<Token> toks;
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = s[i];
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '"') {
      std::string value;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        char q = s[i];
        if (q == '\\' && i + 1 < s.size()) {
          char nxt = s[i + 1];
          if (nxt == '"' || nxt == '\\') {
            value += nxt;
            i += 2;
            continue;
          }
          value += q;  // keep other escapes verbatim
          ++i;
          continue;
        }
        if (q == '"') {
          closed = true;
          ++i;
          break;
        }
        value += q;
        ++i;
      }
      if (!closed) throw ParseError("unterminated quoted string");
      toks.push_back({TokKind::Ident, value, true});
      continue;
    }
    if (c == '-') {
      if (i + 1 < s.size() && s[i + 1] == '>') {
        toks.push_back({TokKind::Arrow, "->", false});
        i += 2;
        continue;
      }
      if (i + 1 < s.size() && s[i + 1] == '-')
        throw ParseError("undirected edges are not supported");
      if (i + 1 < s.size() && (std::isdigit((unsigned char)s[i + 1]) || s[i + 1] == '.')) {
        std::string value = "-";
        ++i;
        while (i < s.size() && is_bare_char((unsigned char)s[i])) value += s[i++];
        toks.push_back({TokKind::Ident, value, false});
        continue;
      }
      throw ParseError("unexpected '-'");
    }
    switch (c) {
      case '{': toks.push_back({TokKind::LBrace, "{", false}); ++i; continue;
      case '}': toks.push_back({TokKind::RBrace, "}", false}); ++i; continue;
      case '[': toks.push_back({TokKind::LBracket, "[", false}); ++i; continue;
      case ']': toks.push_back({TokKind::RBracket, "]", false}); ++i; continue;
      case '=': toks.push_back({TokKind::Equals, "=", false}); ++i; continue;
      case ',': toks.push_back({TokKind::Comma, ",", false}); ++i; continue;
      case ';': toks.push_back({TokKind::Semi, ";", false}); ++i; continue;
      case ':': throw ParseError("ports are not supported");
      default: break;
    }
    if (is_bare_char(c)) {
      std::string value;
      while (i < s.size() && is_bare_char((unsigned char)s[i])) value += s[i++];
      toks.push_back({TokKind::Ident, value, false});
      continue;
    }
    throw ParseError(std::string("unexpected character '") + (char)c + "'");
  }
  toks.push_back({TokKind::End, "", false});
  return toks;
}

struct RawNode {
  std::string id;
  std::map<std::string, std::string> attrs;
  bool declared = false;  // appeared in a node statement (vs edge-only)
};

}  // namespace detail

/// Parses the BPMN-as-DOT dialect: one digraph, node/edge statements with
/// bracketed attribute lists, quoted ids, rankdir. Subgraphs, ports, default
/// attribute statements and undirected edges are ParseErrors. Diamond nodes
/// whose gateway type cannot be recognized fall back to exclusive (XOR) and
/// add a warning.
inline ProcessGraph parse_dot(const std::string& text,
                              std::vector<std::string>* warnings = nullptr) {
  using detail::TokKind;
  auto toks = detail::lex_dot(text);
  size_t pos = 0;
  auto peek = [&]() -> const detail::Token& { return toks[pos]; };
  auto next = [&]() -> const detail::Token& { return toks[pos++]; };
  auto expect = [&](TokKind k, const char* what) -> const detail::Token& {
    if (toks[pos].kind != k) throw ParseError(std::string("expected ") + what);
    return toks[pos++];
  };

  auto is_keyword = [](const detail::Token& t, const char* kw) {
    return t.kind == TokKind::Ident && !t.quoted && detail::ci_equal(t.text, kw);
  };

  if (is_keyword(peek(), "strict")) throw ParseError("strict graphs are not supported");
  if (is_keyword(peek(), "graph")) throw ParseError("undirected graphs are not supported");
  if (!is_keyword(peek(), "digraph")) throw ParseError("expected 'digraph'");
  next();
  if (peek().kind == TokKind::Ident) next();  // optional graph name
  expect(TokKind::LBrace, "'{'");

  std::vector<detail::RawNode> raw_nodes;
  std::map<std::string, size_t> index;
  std::vector<GraphEdge> edges;
  std::optional<std::string> orientation;

  auto touch = [&](const std::string& id) -> detail::RawNode& {
    auto it = index.find(id);
    if (it != index.end()) return raw_nodes[it->second];
    index[id] = raw_nodes.size();
    raw_nodes.push_back({id, {}, false});
    return raw_nodes.back();
  };

  auto parse_attr_list = [&]() {
    std::map<std::string, std::string> attrs;
    expect(TokKind::LBracket, "'['");
    while (peek().kind != TokKind::RBracket) {
      if (peek().kind == TokKind::Comma || peek().kind == TokKind::Semi) {
        next();
        continue;
      }
      const auto key = expect(TokKind::Ident, "attribute name").text;
      expect(TokKind::Equals, "'='");
      if (peek().kind != TokKind::Ident) throw ParseError("expected attribute value");
      attrs[detail::lower(key)] = next().text;
    }
    next();  // ']'
    return attrs;
  };

  while (peek().kind != TokKind::RBrace) {
    const auto& t = peek();
    if (t.kind == TokKind::Semi) {
      next();
      continue;
    }
    if (t.kind == TokKind::End) throw ParseError("unexpected end of input, missing '}'");
    if (t.kind == TokKind::LBrace || is_keyword(t, "subgraph"))
      throw ParseError("subgraphs are not supported");
    if (t.kind != TokKind::Ident) throw ParseError("expected a statement");

    if (!t.quoted && (is_keyword(t, "node") || is_keyword(t, "edge")) &&
        toks[pos + 1].kind == TokKind::LBracket)
      throw ParseError("default attribute statements are not supported");

    if (is_keyword(t, "graph") && toks[pos + 1].kind == TokKind::LBracket) {
      next();
      auto attrs = parse_attr_list();
      auto it = attrs.find("rankdir");
      if (it != attrs.end()) orientation = it->second;
      continue;
    }

    const auto first = next();
    if (peek().kind == TokKind::Equals) {  // top-level assignment, e.g. rankdir=LR
      next();
      if (peek().kind != TokKind::Ident) throw ParseError("expected attribute value");
      const auto value = next().text;
      if (detail::ci_equal(first.text, "rankdir")) orientation = value;
      continue;
    }

    if (peek().kind == TokKind::Arrow) {  // edge chain
      std::vector<std::string> chain{first.text};
      while (peek().kind == TokKind::Arrow) {
        next();
        if (peek().kind != TokKind::Ident) throw ParseError("dangling edge");
        chain.push_back(next().text);
      }
      std::string label;
      while (peek().kind == TokKind::LBracket) {
        auto attrs = parse_attr_list();
        auto it = attrs.find("label");
        if (it != attrs.end()) label = it->second;
      }
      for (size_t k = 0; k + 1 < chain.size(); ++k) {
        touch(chain[k]);
        touch(chain[k + 1]);
        edges.push_back({chain[k], chain[k + 1], label});
      }
      continue;
    }

    // Node statement.
    auto& node = touch(first.text);
    node.declared = true;
    while (peek().kind == TokKind::LBracket) {
      auto attrs = parse_attr_list();
      for (auto& [k, v] : attrs) node.attrs[k] = v;
    }
  }
  next();  // '}'
  if (peek().kind == TokKind::Semi) next();
  if (peek().kind != TokKind::End) throw ParseError("trailing content after graph");

  // Classification pass.
  std::map<std::string, std::pair<int, int>> degrees;
  for (const auto& e : edges) {
    degrees[e.from].second++;
    degrees[e.to].first++;
  }

  ProcessGraph g;
  g.orientation = orientation;
  g.edges = edges;
  for (const auto& rn : raw_nodes) {
    GraphNode n;
    n.id = rn.id;
    auto [in, out] = degrees[rn.id];
    std::string shape;
    if (auto it = rn.attrs.find("shape"); it != rn.attrs.end())
      shape = detail::lower(it->second);
    const bool has_label = rn.attrs.count("label") > 0;
    const std::string label = has_label ? rn.attrs.at("label") : "";

    const bool event_name = detail::ci_equal(rn.id, "START_NODE") ||
                            detail::ci_equal(rn.id, "END_NODE");
    if (shape == "circle" || event_name) {
      if (detail::ci_starts_with(rn.id, "START"))
        n.type = NodeType::StartEvent;
      else if (detail::ci_starts_with(rn.id, "END"))
        n.type = NodeType::EndEvent;
      else if (in == 0)
        n.type = NodeType::StartEvent;
      else
        n.type = NodeType::EndEvent;
      n.label.clear();
    } else if (shape == "diamond") {
      n.type = NodeType::Gateway;
      const std::string marker = detail::trim(label);
      if (marker == "+") {
        n.gateway_type = GatewayType::And;
      } else if (marker == "X" || marker == "x" || marker == "\xc3\x97") {
        n.gateway_type = GatewayType::Xor;
      } else if (detail::ci_starts_with(rn.id, "AND_")) {
        n.gateway_type = GatewayType::And;
      } else if (detail::ci_starts_with(rn.id, "XOR_")) {
        n.gateway_type = GatewayType::Xor;
      } else {
        n.gateway_type = GatewayType::Xor;
        if (warnings)
          warnings->push_back("node '" + rn.id +
                              "': unrecognized gateway label, treating as exclusive");
      }
      n.gateway_role = role_from_degrees(in, out);
      n.label = n.gateway_type == GatewayType::And ? "+" : "X";
    } else {
      n.type = NodeType::Activity;
      n.label = has_label ? label : rn.id;
    }
    g.nodes.push_back(std::move(n));
  }
  return g;
}

inline GraphStats graph_stats(const ProcessGraph& g) {
  GraphStats s;
  s.node_count = (int)g.nodes.size();
  s.edge_count = (int)g.edges.size();
  for (const auto& n : g.nodes)
    if (n.is_gateway()) ++s.gateway_count;
  return s;
}

namespace detail {

inline bool needs_quotes(const std::string& id) {
  if (id.empty()) return true;
  for (const char* kw : {"digraph", "graph", "subgraph", "node", "edge", "strict"})
    if (ci_equal(id, kw)) return true;
  // bare alphanumeric identifier
  if (std::isalpha((unsigned char)id[0]) || id[0] == '_' || (unsigned char)id[0] >= 0x80) {
    for (unsigned char c : id)
      if (!(std::isalnum(c) || c == '_' || c >= 0x80)) return true;
    return false;
  }
  // numeral
  size_t i = id[0] == '-' ? 1 : 0;
  if (i >= id.size()) return true;
  int dots = 0;
  for (; i < id.size(); ++i) {
    if (id[i] == '.') {
      if (++dots > 1) return true;
    } else if (!std::isdigit((unsigned char)id[i])) {
      return true;
    }
  }
  return false;
}

inline std::string quote_id(const std::string& id) {
  if (!needs_quotes(id)) return id;
  std::string out = "\"";
  for (char c : id) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

/// Deterministic serialization in the corpus's DOT conventions.
/// parse_dot(render_canonical(g)) reproduces g for any parsed graph.
inline std::string render_canonical(const ProcessGraph& g) {
  std::string out = "digraph process {\n";
  if (g.orientation)
    out += "graph [rankdir=" + detail::quote_id(*g.orientation) + "]\n";
  for (const auto& n : g.nodes) {
    out += detail::quote_id(n.id);
    switch (n.type) {
      case NodeType::StartEvent:
      case NodeType::EndEvent:
        out += " [label=\"\" shape=circle width=0.3]";
        break;
      case NodeType::Activity:
        if (n.label != n.id) out += " [label=" + detail::quote_id(n.label) + " shape=box width=0.6]";
        else out += " [shape=box width=0.6]";
        break;
      case NodeType::Gateway:
        out += " [label=\"";
        out += n.gateway_type == GatewayType::And ? '+' : 'X';
        out += "\" fixedsize=true shape=diamond width=0.5]";
        break;
    }
    out += '\n';
  }
  for (const auto& e : g.edges) {
    out += detail::quote_id(e.from) + " -> " + detail::quote_id(e.to);
    if (!e.label.empty()) out += " [label=" + detail::quote_id(e.label) + "]";
    out += '\n';
  }
  out += "}\n";
  return out;
}

namespace detail {

inline std::tuple<std::string, int, int, int, std::string> node_key(const GraphNode& n) {
  int gw_type = n.is_gateway() ? (n.gateway_type == GatewayType::And ? 0 : 1) : -1;
  int gw_role = n.is_gateway() ? (int)n.gateway_role : -1;
  return {n.id, (int)n.type, gw_type, gw_role, n.label};
}

}  // namespace detail

/// Order-insensitive equality: node multiset, edge multiset, orientation.
inline bool graphs_equal(const ProcessGraph& a, const ProcessGraph& b,
                         bool include_orientation = true) {
  if (include_orientation && a.orientation != b.orientation) return false;
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;

  auto keys = [](const ProcessGraph& g) {
    std::vector<std::tuple<std::string, int, int, int, std::string>> ks;
    for (const auto& n : g.nodes) ks.push_back(detail::node_key(n));
    std::sort(ks.begin(), ks.end());
    return ks;
  };
  if (keys(a) != keys(b)) return false;

  auto edge_keys = [](const ProcessGraph& g) {
    std::vector<std::tuple<std::string, std::string, std::string>> ks;
    for (const auto& e : g.edges) ks.emplace_back(e.from, e.to, e.label);
    std::sort(ks.begin(), ks.end());
    return ks;
  };
  return edge_keys(a) == edge_keys(b);
}

/// True when every edge endpoint is reachable from every other node ignoring
/// direction. Empty and single-node graphs count as connected.
inline bool weakly_connected(const ProcessGraph& g) {
  if (g.nodes.size() <= 1) return true;
  std::map<std::string, size_t> idx;
  for (size_t i = 0; i < g.nodes.size(); ++i) idx[g.nodes[i].id] = i;
  std::vector<std::vector<size_t>> adj(g.nodes.size());
  for (const auto& e : g.edges) {
    size_t u = idx.at(e.from), v = idx.at(e.to);
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<bool> seen(g.nodes.size(), false);
  std::vector<size_t> stack{0};
  seen[0] = true;
  size_t visited = 1;
  while (!stack.empty()) {
    size_t u = stack.back();
    stack.pop_back();
    for (size_t v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        ++visited;
        stack.push_back(v);
      }
  }
  return visited == g.nodes.size();
}

}  // namespace bpmeval
