#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bpmeval/bpmn_xml.hpp"
#include "bpmeval/dot.hpp"
#include "bpmeval/errors.hpp"
#include "bpmeval/stats.hpp"

namespace bpmeval {

enum class RuleStatus { WellDone, Violated, Missing };

/// The eleven understandability checks this toolkit verifies.
constexpr std::array<int, 11> kGuidelineRuleIds = {2, 3, 8, 16, 18, 20, 22, 24, 30, 34, 47};

inline const char* guideline_title(int rule_id) {
  switch (rule_id) {
    case 2: return "Model size within threshold";
    case 3: return "Hierarchical decomposition";
    case 8: return "Activity descriptions";
    case 16: return "Explicit gateways";
    case 18: return "Balanced splits and joins";
    case 20: return "No degenerate gateways";
    case 22: return "Default flows at exclusive splits";
    case 24: return "Message flows";
    case 30: return "Labeled activities";
    case 34: return "Labeled exclusive splits";
    case 47: return "Declared orientation";
    default: return "unknown";
  }
}

struct GuidelineReport {
  std::string diagram_id;
  std::map<int, RuleStatus> verdicts;  // exactly the eleven rule ids
  std::map<int, std::string> notes;
};

struct RuleAggregate {
  int rule_id = 0;
  long ok = 0;
  long ko = 0;
  long missing = 0;
  std::optional<double> pass_percent;  // 100 * ok / (ok + ko); absent if nothing verifiable
  std::optional<double> wilson_low;    // percent scale
  std::optional<double> wilson_high;
};

struct GuidelineOptions {
  int size_threshold = 31;  // flow-node budget for rules 2 and 3
};

/// Report for a diagram whose XML conversion (or parse) failed outright.
inline GuidelineReport all_missing_report(const std::string& diagram_id,
                                          const std::string& reason = "conversion failed") {
  GuidelineReport r;
  r.diagram_id = diagram_id;
  for (int id : kGuidelineRuleIds) {
    r.verdicts[id] = RuleStatus::Missing;
    r.notes[id] = reason;
  }
  return r;
}

/// Runs the eleven checks against a parsed graph. XML conversion is attempted
/// first; if it fails the whole report is Missing.
inline GuidelineReport verify_model(const ProcessGraph& g, const GuidelineOptions& opts = {},
                                    const std::string& diagram_id = "") {
  try {
    (void)to_bpmn_xml(g);
  } catch (const std::exception& e) {
    return all_missing_report(diagram_id, e.what());
  }

  GuidelineReport r;
  r.diagram_id = diagram_id;
  auto set = [&](int rule, bool ok, const std::string& note) {
    r.verdicts[rule] = ok ? RuleStatus::WellDone : RuleStatus::Violated;
    r.notes[rule] = note;
  };

  std::map<std::string, std::pair<int, int>> degrees;
  for (const auto& e : g.edges) {
    degrees[e.from].second++;
    degrees[e.to].first++;
  }

  const int flow_nodes = (int)g.nodes.size();

  // R2 / R3: size discipline; sub-processes are not expressible in this
  // dialect, so R3 reduces to the same size check.
  set(2, flow_nodes <= opts.size_threshold,
      std::to_string(flow_nodes) + " flow nodes vs threshold " +
          std::to_string(opts.size_threshold));
  set(3, flow_nodes <= opts.size_threshold,
      "no sub-processes; " + std::to_string(flow_nodes) + " flow nodes");

  // R8: the DOT dialect carries no documentation text for activities.
  set(8, false, "activity documentation is not expressible in the DOT dialect");

  // R16: only gateways may branch or merge.
  {
    const GraphNode* offender = nullptr;
    for (const auto& n : g.nodes) {
      if (n.is_gateway()) continue;
      auto [in, out] = degrees[n.id];
      if (in > 1 || out > 1) {
        offender = &n;
        break;
      }
    }
    set(16, offender == nullptr,
        offender ? "node '" + offender->id + "' branches or merges without a gateway"
                 : "all splits and joins use gateways");
  }

  // R18: per gateway type, split and join counts must balance.
  {
    int and_split = 0, and_join = 0, xor_split = 0, xor_join = 0;
    for (const auto& n : g.nodes) {
      if (!n.is_gateway()) continue;
      if (n.gateway_role == GatewayRole::Split)
        (n.gateway_type == GatewayType::And ? and_split : xor_split)++;
      else if (n.gateway_role == GatewayRole::Join)
        (n.gateway_type == GatewayType::And ? and_join : xor_join)++;
    }
    const bool balanced = and_split == and_join && xor_split == xor_join;
    set(18, balanced,
        "parallel " + std::to_string(and_split) + "/" + std::to_string(and_join) +
            ", exclusive " + std::to_string(xor_split) + "/" + std::to_string(xor_join) +
            " split/join");
  }

  // R20: gateways must actually route.
  {
    const GraphNode* degenerate = nullptr;
    for (const auto& n : g.nodes)
      if (n.is_gateway() && n.gateway_role == GatewayRole::Degenerate) {
        degenerate = &n;
        break;
      }
    set(20, degenerate == nullptr,
        degenerate ? "gateway '" + degenerate->id + "' has at most one incoming and one outgoing flow"
                   : "no degenerate gateways");
  }

  // R22 / R34: the dialect cannot mark default flows or label exclusive
  // splits with questions/outcomes, so any exclusive split violates both.
  {
    int xor_splits = 0;
    for (const auto& n : g.nodes)
      if (n.is_gateway() && n.gateway_type == GatewayType::Xor &&
          n.gateway_role == GatewayRole::Split)
        ++xor_splits;
    set(22, xor_splits == 0,
        xor_splits ? std::to_string(xor_splits) + " exclusive split(s) without a default flow"
                   : "no exclusive splits");
    set(34, xor_splits == 0,
        xor_splits ? std::to_string(xor_splits) + " unlabeled exclusive split(s)"
                   : "no exclusive splits");
  }

  // R24: single implicit participant, no message flows to connect.
  set(24, true, "single participant, nothing to connect");

  // R30: every activity carries a non-blank label.
  {
    const GraphNode* unlabeled = nullptr;
    for (const auto& n : g.nodes)
      if (n.type == NodeType::Activity && detail::trim(n.label).empty()) {
        unlabeled = &n;
        break;
      }
    set(30, unlabeled == nullptr,
        unlabeled ? "activity '" + unlabeled->id + "' has no label" : "all activities labeled");
  }

  // R47: a rank direction was declared.
  set(47, g.orientation.has_value() && !g.orientation->empty(),
      g.orientation ? "orientation " + *g.orientation : "no orientation declared");

  return r;
}

/// Per-rule OK/KO/Missing tallies with pass rate and a 95% Wilson interval
/// over the verifiable diagrams.
inline std::vector<RuleAggregate> aggregate_reports(const std::vector<GuidelineReport>& reports) {
  if (reports.empty()) throw EmptyInput("aggregate_reports requires at least one report");

  std::vector<RuleAggregate> out;
  for (int rule : kGuidelineRuleIds) {
    RuleAggregate agg;
    agg.rule_id = rule;
    for (const auto& r : reports) {
      switch (r.verdicts.at(rule)) {
        case RuleStatus::WellDone: ++agg.ok; break;
        case RuleStatus::Violated: ++agg.ko; break;
        case RuleStatus::Missing: ++agg.missing; break;
      }
    }
    const long verifiable = agg.ok + agg.ko;
    if (verifiable > 0) {
      agg.pass_percent = 100.0 * (double)agg.ok / (double)verifiable;
      const Interval ci = wilson_interval(agg.ok, verifiable, 0.95);
      agg.wilson_low = 100.0 * ci.low;
      agg.wilson_high = 100.0 * ci.high;
    }
    out.push_back(agg);
  }
  return out;
}

}  // namespace bpmeval
