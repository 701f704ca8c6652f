#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bpmeval/dot.hpp"
#include "bpmeval/errors.hpp"
#include "bpmeval/prompts.hpp"

namespace bpmeval {

/// One benchmark item: a described process, its reference DOT, and optionally
/// a model-generated candidate.
struct EvalRecord {
  std::string id;
  std::string domain;
  std::string description;
  std::string reference_dot;
  std::optional<std::string> candidate_dot;
};

enum class RejectionReason { MalformedDot, Duplicate, Disconnected, OverTokenLimit };

inline const char* rejection_name(RejectionReason r) {
  switch (r) {
    case RejectionReason::MalformedDot: return "malformed_dot";
    case RejectionReason::Duplicate: return "duplicate";
    case RejectionReason::Disconnected: return "disconnected";
    case RejectionReason::OverTokenLimit: return "over_token_limit";
  }
  return "unknown";
}

struct FilterConfig {
  int token_limit = 2048;
  bool drop_duplicates = true;
  bool drop_disconnected = true;
};

using TokenCounter = std::function<long(const std::string&)>;

/// Default token estimate: ceil(1.33 x whitespace word count). The counter is
/// pluggable so an exact model tokenizer can be substituted.
inline long default_token_counter(const std::string& text) {
  long words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return (long)std::ceil(1.33 * (double)words);
}

inline long estimate_tokens(const std::string& text, const TokenCounter& counter = nullptr) {
  return counter ? counter(text) : default_token_counter(text);
}

struct FilterResult {
  std::vector<EvalRecord> kept;
  std::vector<std::pair<EvalRecord, RejectionReason>> rejected;
};

/// Corpus hygiene: parseable references, weak connectivity, uniqueness by
/// canonical DOT, and instruction+description within the token budget.
/// Order preserved; each rejected record carries one primary reason.
inline FilterResult filter_corpus(const std::vector<EvalRecord>& records,
                                  const FilterConfig& cfg = {},
                                  const TokenCounter& counter = nullptr) {
  FilterResult out;
  std::set<std::string> seen;
  for (const auto& rec : records) {
    ProcessGraph g;
    try {
      g = parse_dot(rec.reference_dot);
    } catch (const ParseError&) {
      out.rejected.emplace_back(rec, RejectionReason::MalformedDot);
      continue;
    }
    if (cfg.drop_duplicates) {
      const std::string canonical = render_canonical(g);
      if (!seen.insert(canonical).second) {
        out.rejected.emplace_back(rec, RejectionReason::Duplicate);
        continue;
      }
    }
    if (cfg.drop_disconnected && !weakly_connected(g)) {
      out.rejected.emplace_back(rec, RejectionReason::Disconnected);
      continue;
    }
    std::string prompt = prompts::kTunedZeroShot;
    prompt.replace(prompt.find(prompts::kDescriptionSlot),
                   std::string(prompts::kDescriptionSlot).size(), rec.description);
    if (estimate_tokens(prompt, counter) > cfg.token_limit) {
      out.rejected.emplace_back(rec, RejectionReason::OverTokenLimit);
      continue;
    }
    out.kept.push_back(rec);
  }
  return out;
}

struct SampleResult {
  std::vector<EvalRecord> selected;
  std::vector<std::string> warnings;  // short buckets that were taken whole
};

namespace detail {

// Nearest-rank percentile over a sorted vector (1-based rank ceil(p*N)).
inline int nearest_rank(const std::vector<int>& sorted, double p) {
  const size_t rank = (size_t)std::ceil(p * (double)sorted.size());
  return sorted[std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1)];
}

inline uint64_t bounded_draw64(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace detail

/// Per domain, splits records into terciles by reference node count at the
/// 33rd/67th nearest-rank percentiles (boundary ties go to the lower bucket)
/// and draws per_bucket records uniformly without replacement per tercile.
inline SampleResult stratified_sample(const std::vector<EvalRecord>& records, int per_bucket,
                                      uint64_t seed) {
  if (per_bucket < 1) throw EmptyInput("stratified_sample requires per_bucket >= 1");

  struct Item {
    size_t index;
    int node_count;
  };
  std::map<std::string, std::vector<Item>> domains;
  for (size_t i = 0; i < records.size(); ++i) {
    const ProcessGraph g = parse_dot(records[i].reference_dot);
    domains[records[i].domain].push_back({i, (int)g.nodes.size()});
  }

  SampleResult out;
  std::mt19937_64 rng(seed);
  for (auto& [domain, items] : domains) {
    std::vector<int> counts;
    for (const auto& it : items) counts.push_back(it.node_count);
    std::sort(counts.begin(), counts.end());
    const int p33 = detail::nearest_rank(counts, 0.33);
    const int p67 = detail::nearest_rank(counts, 0.67);

    std::vector<std::vector<size_t>> buckets(3);  // easy, medium, hard
    for (const auto& it : items) {
      int b = it.node_count <= p33 ? 0 : it.node_count <= p67 ? 1 : 2;
      buckets[b].push_back(it.index);
    }
    static const char* kBucketNames[3] = {"easy", "medium", "hard"};
    for (int b = 0; b < 3; ++b) {
      auto& bucket = buckets[b];
      if ((int)bucket.size() <= per_bucket) {
        if ((int)bucket.size() < per_bucket)
          out.warnings.push_back("domain '" + domain + "' " + kBucketNames[b] + " bucket has " +
                                 std::to_string(bucket.size()) + " record(s), need " +
                                 std::to_string(per_bucket) + "; taking all");
        for (size_t idx : bucket) out.selected.push_back(records[idx]);
        continue;
      }
      // partial Fisher-Yates
      for (int k = 0; k < per_bucket; ++k) {
        const size_t pick =
            (size_t)k + (size_t)detail::bounded_draw64(rng, bucket.size() - (size_t)k);
        std::swap(bucket[(size_t)k], bucket[pick]);
        out.selected.push_back(records[bucket[(size_t)k]]);
      }
    }
  }
  return out;
}

struct CorpusStats {
  double mean_nodes = 0.0;
  double mean_edges = 0.0;
  double mean_gateways = 0.0;
  double mean_words = 0.0;
  double mean_sentences = 0.0;
  long record_count = 0;
};

namespace detail {

inline long count_words(const std::string& text) {
  long words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) in_word = false;
    else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

// Sentences = terminator runs (. ? !) preceded by at least one visible
// non-terminator character.
inline long count_sentences(const std::string& text) {
  long sentences = 0;
  bool has_content = false, in_terminator = false;
  for (unsigned char c : text) {
    const bool term = c == '.' || c == '?' || c == '!';
    if (term) {
      if (!in_terminator && has_content) {
        ++sentences;
        has_content = false;
      }
      in_terminator = true;
    } else {
      in_terminator = false;
      if (!std::isspace(c)) has_content = true;
    }
  }
  return sentences;
}

}  // namespace detail

inline CorpusStats corpus_stats(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw EmptyInput("corpus_stats requires at least one record");
  CorpusStats s;
  for (const auto& rec : records) {
    const GraphStats gs = graph_stats(parse_dot(rec.reference_dot));
    s.mean_nodes += gs.node_count;
    s.mean_edges += gs.edge_count;
    s.mean_gateways += gs.gateway_count;
    s.mean_words += (double)detail::count_words(rec.description);
    s.mean_sentences += (double)detail::count_sentences(rec.description);
  }
  const double n = (double)records.size();
  s.mean_nodes /= n;
  s.mean_edges /= n;
  s.mean_gateways /= n;
  s.mean_words /= n;
  s.mean_sentences /= n;
  s.record_count = (long)records.size();
  return s;
}

struct CorpusSplit {
  std::vector<EvalRecord> train;
  std::vector<EvalRecord> validation;
  std::vector<EvalRecord> test;
};

/// Seeded 80/10/10 shuffle-split.
inline CorpusSplit train_val_test_split(const std::vector<EvalRecord>& records, uint64_t seed) {
  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[detail::bounded_draw64(rng, i)]);

  CorpusSplit out;
  const size_t n = records.size();
  const size_t n_train = (size_t)((double)n * 0.8);
  const size_t n_val = (size_t)((double)n * 0.1);
  for (size_t i = 0; i < n; ++i) {
    const EvalRecord& rec = records[order[i]];
    if (i < n_train) out.train.push_back(rec);
    else if (i < n_train + n_val) out.validation.push_back(rec);
    else out.test.push_back(rec);
  }
  return out;
}

// ---- JSONL corpus I/O ------------------------------------------------------

inline nlohmann::json record_to_json(const EvalRecord& rec) {
  nlohmann::json j{{"id", rec.id},
                   {"domain", rec.domain},
                   {"description", rec.description},
                   {"reference_dot", rec.reference_dot}};
  if (rec.candidate_dot) j["candidate_dot"] = *rec.candidate_dot;
  return j;
}

inline EvalRecord record_from_json(const nlohmann::json& j) {
  EvalRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.domain = j.value("domain", "");
  rec.description = j.value("description", "");
  rec.reference_dot = j.value("reference_dot", "");
  if (j.contains("candidate_dot") && !j.at("candidate_dot").is_null())
    rec.candidate_dot = j.at("candidate_dot").get<std::string>();
  return rec;
}

inline std::vector<EvalRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<EvalRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

inline void write_jsonl(const std::string& path, const std::vector<EvalRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& rec : records) out << record_to_json(rec).dump() << '\n';
}

}  // namespace bpmeval
