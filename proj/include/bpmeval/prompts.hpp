#pragma once

#include <string>

#include "bpmeval/errors.hpp"

namespace bpmeval {

enum class PromptMode { TunedZeroShot, AssistedZeroShot, ChainOfThought, TreeOfThought };

namespace prompts {

inline constexpr const char* kDescriptionSlot = "<BUSINESS PROCESS DESCRIPTION>";

/// Instruction used for the tuned model (same format as training).
inline constexpr const char* kTunedZeroShot =
    "You are an expert in BPMN modeling and DOT language. Your task is to convert detailed "
    "textual descriptions of business processes into accurate BPMN model codes written in DOT "
    "language. Label all nodes with their activity names. Represent all connections between "
    "nodes without labeling the connections. Represent each node and its connections "
    "accurately, ensuring all decision points and flows are included and connected. Now, "
    "generate BPMN business process model code in DOT language for the following textual "
    "description of a business process: <BUSINESS PROCESS DESCRIPTION>";

/// Syntax-reference graph embedded in the assisted prompt. Also serves as the
/// canonical small fixture across the test suites.
inline constexpr const char* kSyntaxReferenceDot =
    "digraph process {\n"
    "graph [rankdir=LR]\n"
    "START_NODE [label=\"\" shape=circle width=0.3]\n"
    "\"Gather Requirements\" [shape=box width=0.6]\n"
    "\"Design System\" [shape=box width=0.6]\n"
    "\"Review Requirements\" [shape=box width=0.6]\n"
    "END_NODE [label=\"\" shape=circle width=0.3]\n"
    "START_NODE -> \"Gather Requirements\"\n"
    "\"Gather Requirements\" -> \"AND_SPLIT\"\n"
    "\"AND_SPLIT\" [label=\"+\" fixedsize=true shape=diamond width=0.5]\n"
    "\"AND_SPLIT\" -> \"Design System\"\n"
    "\"AND_SPLIT\" -> \"Review Requirements\"\n"
    "\"Design System\" -> \"AND_JOIN\"\n"
    "\"Review Requirements\" -> \"AND_JOIN\"\n"
    "\"AND_JOIN\" [label=\"+\" fixedsize=true shape=diamond width=0.5]\n"
    "\"AND_JOIN\" -> END_NODE\n"
    "}";

/// Strengthened zero-shot prompt for untuned baselines: syntax conventions
/// plus the reference graph.
inline const std::string kAssistedZeroShot =
    std::string(
        "Label all nodes with their activity names. Represent all connections between nodes "
        "without labeling the connections. Represent each step and its connections accurately, "
        "ensuring all decision points and flows are included and connected. Use the following "
        "sample BPMN business process model for syntax reference:\n") +
    kSyntaxReferenceDot +
    "\nNow, generate BPMN business process model code in DOT language for the following "
    "textual description of a business process: <BUSINESS PROCESS DESCRIPTION>";

// Reasoning preambles are configuration, not fixed by the task definition.
inline constexpr const char* kChainOfThoughtPreamble =
    "Reason step by step about the activities, gateways, and flows described below before "
    "emitting the final DOT code. After your reasoning, output the final BPMN business process "
    "model in DOT language inside a code block.\n\n";

inline constexpr const char* kTreeOfThoughtPreamble =
    "Propose three candidate BPMN structures for the process described below, compare them for "
    "completeness and correctness of activities, gateways, and flows, select the best one, and "
    "output only that candidate as the final DOT code inside a code block.\n\n";

}  // namespace prompts

/// Renders the prompt for one description under the given strategy. The
/// description replaces the template's placeholder slot.
inline std::string build_prompt(PromptMode mode, const std::string& description) {
  if (description.empty()) throw EmptyDescription();

  std::string text;
  switch (mode) {
    case PromptMode::TunedZeroShot: text = prompts::kTunedZeroShot; break;
    case PromptMode::AssistedZeroShot: text = prompts::kAssistedZeroShot; break;
    case PromptMode::ChainOfThought:
      text = std::string(prompts::kChainOfThoughtPreamble) + prompts::kTunedZeroShot;
      break;
    case PromptMode::TreeOfThought:
      text = std::string(prompts::kTreeOfThoughtPreamble) + prompts::kTunedZeroShot;
      break;
  }
  const size_t slot = text.find(prompts::kDescriptionSlot);
  text.replace(slot, std::string(prompts::kDescriptionSlot).size(), description);
  return text;
}

}  // namespace bpmeval
