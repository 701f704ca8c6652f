#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bpmeval/dataset.hpp"
#include "bpmeval/dot.hpp"
#include "bpmeval/errors.hpp"
#include "bpmeval/ged.hpp"
#include "bpmeval/guidelines.hpp"
#include "bpmeval/prompts.hpp"
#include "bpmeval/stats.hpp"
#include "bpmeval/text_metrics.hpp"

namespace bpmeval {

enum class ExtractPolicy { FirstBlock, LastBlock };

namespace detail {

inline bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

inline std::optional<size_t> find_digraph_keyword(const std::string& text, ExtractPolicy policy) {
  std::optional<size_t> found;
  size_t pos = 0;
  const std::string lowered = lower(text);
  while ((pos = lowered.find("digraph", pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char((unsigned char)lowered[pos - 1]);
    const size_t end = pos + 7;
    const bool right_ok = end >= lowered.size() || !is_word_char((unsigned char)lowered[end]);
    if (left_ok && right_ok) {
      found = pos;
      if (policy == ExtractPolicy::FirstBlock) return found;
    }
    pos = end;
  }
  return found;
}

// From the keyword through its brace-balanced close (quote-aware); the whole
// tail if the braces never balance.
inline std::string clip_balanced(const std::string& text, size_t start) {
  const auto mask = quoted_mask(text);
  long depth = 0;
  bool opened = false;
  for (size_t i = start; i < text.size(); ++i) {
    if (mask[i]) continue;
    if (text[i] == '{') {
      ++depth;
      opened = true;
    } else if (text[i] == '}') {
      --depth;
      if (opened && depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return text.substr(start);
}

}  // namespace detail

/// Pulls the diagram out of a raw completion: the interior of a fenced code
/// block when one holds a digraph, otherwise the substring from a digraph
/// keyword through its brace-balanced close. The result is sanitized.
/// Chain/tree-of-thought pipelines pass LastBlock so reasoning text and
/// intermediate sketches are skipped.
inline std::string extract_dot(const std::string& raw,
                               ExtractPolicy policy = ExtractPolicy::FirstBlock) {
  // Fenced blocks first.
  std::vector<std::string> blocks;
  {
    std::string current;
    bool in_block = false;
    size_t pos = 0;
    while (pos <= raw.size()) {
      const size_t nl = raw.find('\n', pos);
      const std::string line =
          raw.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
      if (detail::trim(line).rfind("```", 0) == 0) {
        if (in_block) blocks.push_back(current);
        current.clear();
        in_block = !in_block;
      } else if (in_block) {
        current += line;
        current += '\n';
      }
      if (nl == std::string::npos) break;
      pos = nl + 1;
    }
  }
  std::optional<std::string> fenced;
  for (const auto& block : blocks) {
    if (!detail::find_digraph_keyword(block, ExtractPolicy::FirstBlock)) continue;
    fenced = block;
    if (policy == ExtractPolicy::FirstBlock) break;
  }
  if (fenced) {
    const size_t end = fenced->find_last_not_of(" \t\r\n");
    return sanitize_dot(end == std::string::npos ? "" : fenced->substr(0, end + 1));
  }

  const auto keyword = detail::find_digraph_keyword(raw, policy);
  if (!keyword) throw NoDiagramFound();
  return sanitize_dot(detail::clip_balanced(raw, *keyword));
}

struct MetricBundle {
  std::string record_id;
  double bleu = 0.0;
  double rouge_l = 0.0;
  double meteor = 0.0;
  double r_ged_percent = 0.0;
  bool parse_ok = false;
  bool ged_exact = false;
};

struct EvalOptions {
  uint64_t seed = 42;
  int bootstrap_resamples = 10000;
  double confidence = 0.95;
  GedBudget budget{};
  GuidelineOptions guidelines{};
};

/// Scores one record's candidate against its reference. Text metrics run on
/// sanitized token sequences; R-GED on the parsed graphs. An unparseable
/// candidate collapses R-GED to zero while the text metrics fall back to the
/// raw token sequences.
inline MetricBundle evaluate_pair(const EvalRecord& record, const EvalOptions& opts = {}) {
  if (!record.candidate_dot) throw MissingCandidate(record.id);

  MetricBundle out;
  out.record_id = record.id;

  const std::string ref_clean = sanitize_dot(record.reference_dot);
  const std::string cand_clean = sanitize_dot(*record.candidate_dot);
  const ProcessGraph reference = parse_dot(ref_clean);

  std::optional<ProcessGraph> candidate;
  try {
    candidate = parse_dot(cand_clean);
  } catch (const ParseError&) {
  }

  if (candidate) {
    out.parse_ok = true;
    const TokenSequence ref_tokens = tokenize(ref_clean);
    const TokenSequence cand_tokens = tokenize(cand_clean);
    out.bleu = bleu(cand_tokens, ref_tokens);
    out.rouge_l = rouge_l(cand_tokens, ref_tokens);
    out.meteor = meteor(cand_tokens, ref_tokens);
    const GedResult distance = ged(reference, *candidate, opts.budget);
    out.ged_exact = distance.exact;
    out.r_ged_percent = r_ged_from_cost(distance.cost, reference, *candidate).percent;
  } else {
    const TokenSequence ref_tokens = tokenize(record.reference_dot);
    const TokenSequence cand_tokens = tokenize(*record.candidate_dot);
    out.bleu = bleu(cand_tokens, ref_tokens);
    out.rouge_l = rouge_l(cand_tokens, ref_tokens);
    out.meteor = meteor(cand_tokens, ref_tokens);
    out.r_ged_percent = 0.0;  // unparseable output scores zero structurally
  }
  return out;
}

inline const std::vector<std::string>& metric_keys() {
  static const std::vector<std::string> keys{"bleu", "rouge_l", "meteor", "r_ged"};
  return keys;
}

inline std::string metric_display(const std::string& key) {
  if (key == "bleu") return "BLEU";
  if (key == "rouge_l") return "ROUGE-L";
  if (key == "meteor") return "METEOR";
  if (key == "r_ged") return "R-GED";
  return key;
}

struct ModelReport {
  std::string model;
  std::vector<MetricBundle> bundles;  // record order
  std::map<std::string, Interval> macro;
  std::map<std::string, std::map<std::string, Interval>> per_domain;  // domain -> metric -> CI
  std::vector<RuleAggregate> guideline_aggregates;
};

struct ReportSet {
  std::vector<ModelReport> models;  // sorted by model name
  std::map<std::string, FriedmanResult> ranking;  // metric -> test, >= 2 runs only
  int ranking_blocks = 0;  // records where every run produced a valid output
};

using CandidateSource = std::map<std::string, std::string>;  // record id -> candidate DOT

namespace detail {

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline double metric_value(const MetricBundle& b, const std::string& key) {
  if (key == "bleu") return b.bleu;
  if (key == "rouge_l") return b.rouge_l;
  if (key == "meteor") return b.meteor;
  return b.r_ged_percent;
}

}  // namespace detail

/// Evaluates one or more candidate runs over a corpus: per-record bundles,
/// macro and per-domain bootstrap CIs, guideline aggregates, and (with two or
/// more runs) Friedman/Kendall ranking over the records where every run
/// produced a parseable diagram.
inline ReportSet run_evaluation(const std::vector<EvalRecord>& records,
                                const std::map<std::string, CandidateSource>& runs,
                                const EvalOptions& opts = {}) {
  ReportSet out;
  {
    std::set<std::string> ids;
    for (const auto& rec : records)
      if (!ids.insert(rec.id).second) throw IdMismatch("duplicate record id: " + rec.id);
  }
  for (const auto& [model, source] : runs) {
    for (const auto& rec : records)
      if (!source.count(rec.id))
        throw IdMismatch("run '" + model + "' lacks a candidate for record '" + rec.id + "'");

    ModelReport report;
    report.model = model;
    std::vector<GuidelineReport> guideline_reports;
    for (const auto& rec : records) {
      EvalRecord with_candidate = rec;
      with_candidate.candidate_dot = source.at(rec.id);
      report.bundles.push_back(evaluate_pair(with_candidate, opts));

      try {
        guideline_reports.push_back(
            verify_model(parse_dot(sanitize_dot(source.at(rec.id))), opts.guidelines, rec.id));
      } catch (const ParseError& e) {
        guideline_reports.push_back(all_missing_report(rec.id, e.what()));
      }
    }
    report.guideline_aggregates = aggregate_reports(guideline_reports);

    std::map<std::string, std::vector<size_t>> by_domain;
    for (size_t i = 0; i < records.size(); ++i) by_domain[records[i].domain].push_back(i);

    for (const auto& key : metric_keys()) {
      std::vector<double> values;
      for (const auto& b : report.bundles) values.push_back(detail::metric_value(b, key));
      report.macro[key] =
          bootstrap_ci(values, opts.bootstrap_resamples, opts.confidence,
                       opts.seed ^ detail::fnv1a(model + "|macro|" + key));
      for (const auto& [domain, indices] : by_domain) {
        std::vector<double> domain_values;
        for (size_t i : indices) domain_values.push_back(values[i]);
        report.per_domain[domain][key] =
            bootstrap_ci(domain_values, opts.bootstrap_resamples, opts.confidence,
                         opts.seed ^ detail::fnv1a(model + "|domain|" + domain + "|" + key));
      }
    }
    out.models.push_back(std::move(report));
  }

  if (out.models.size() >= 2) {
    std::vector<size_t> common;  // records valid under every run
    for (size_t i = 0; i < records.size(); ++i) {
      bool all_ok = true;
      for (const auto& m : out.models) all_ok = all_ok && m.bundles[i].parse_ok;
      if (all_ok) common.push_back(i);
    }
    out.ranking_blocks = (int)common.size();
    if (common.size() >= 2) {
      for (const auto& key : metric_keys()) {
        std::vector<std::vector<double>> matrix;
        for (size_t i : common) {
          std::vector<double> row;
          for (const auto& m : out.models) row.push_back(detail::metric_value(m.bundles[i], key));
          matrix.push_back(std::move(row));
        }
        out.ranking[key] = friedman_test(matrix);
      }
    }
  }
  return out;
}

enum class ReportFormat { Markdown, Csv };

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::string ci_cell(const Interval& ci) {
  return fixed(ci.point, 2) + " [" + fixed(ci.low, 2) + ", " + fixed(ci.high, 2) + "]";
}

inline std::string file_slug(const std::string& name) {
  std::string out;
  for (unsigned char c : name) out += std::isalnum(c) ? (char)std::tolower(c) : '_';
  return out.empty() ? "model" : out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content,
                       std::vector<std::string>& written) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  written.push_back(path.string());
}

}  // namespace detail

/// Writes the report tables (macro, per-domain, guidelines, ranking, and in
/// CSV mode the per-record bundles) into out_dir. Emission is deterministic:
/// the same ReportSet produces byte-identical files.
inline std::vector<std::string> emit_reports(const ReportSet& rs, ReportFormat format,
                                             const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  std::vector<std::string> written;
  const bool md = format == ReportFormat::Markdown;
  const std::string ext = md ? ".md" : ".csv";

  {  // macro table
    std::string t;
    if (md) {
      t += "| Model | BLEU | ROUGE-L | METEOR | R-GED |\n";
      t += "|---|---|---|---|---|\n";
      for (const auto& m : rs.models) {
        t += "| " + m.model;
        for (const auto& key : metric_keys()) t += " | " + detail::ci_cell(m.macro.at(key));
        t += " |\n";
      }
    } else {
      t += "model";
      for (const auto& key : metric_keys())
        t += "," + key + "," + key + "_low," + key + "_high";
      t += "\n";
      for (const auto& m : rs.models) {
        t += m.model;
        for (const auto& key : metric_keys()) {
          const auto& ci = m.macro.at(key);
          t += "," + detail::fixed(ci.point, 4) + "," + detail::fixed(ci.low, 4) + "," +
               detail::fixed(ci.high, 4);
        }
        t += "\n";
      }
    }
    detail::write_file(fs::path(out_dir) / ("macro_metrics" + ext), t, written);
  }

  for (const auto& m : rs.models) {
    const std::string slug = detail::file_slug(m.model);

    {  // per-domain means
      std::string t;
      if (md) {
        t += "| Domain | BLEU | ROUGE-L | METEOR | R-GED |\n";
        t += "|---|---|---|---|---|\n";
        for (const auto& [domain, metrics] : m.per_domain) {
          t += "| " + domain;
          for (const auto& key : metric_keys()) t += " | " + detail::ci_cell(metrics.at(key));
          t += " |\n";
        }
      } else {
        t += "domain";
        for (const auto& key : metric_keys())
          t += "," + key + "," + key + "_low," + key + "_high";
        t += "\n";
        for (const auto& [domain, metrics] : m.per_domain) {
          t += "\"" + domain + "\"";
          for (const auto& key : metric_keys()) {
            const auto& ci = metrics.at(key);
            t += "," + detail::fixed(ci.point, 4) + "," + detail::fixed(ci.low, 4) + "," +
                 detail::fixed(ci.high, 4);
          }
          t += "\n";
        }
      }
      detail::write_file(fs::path(out_dir) / ("per_domain_" + slug + ext), t, written);
    }

    {  // guideline verification aggregate
      std::string t;
      if (md) {
        t += "| ID | Guideline | OK | KO | Missing | Pass (%) | Wilson 95% CI |\n";
        t += "|---|---|---|---|---|---|---|\n";
        for (const auto& agg : m.guideline_aggregates) {
          t += "| " + std::to_string(agg.rule_id) + " | " + guideline_title(agg.rule_id) + " | " +
               std::to_string(agg.ok) + " | " + std::to_string(agg.ko) + " | " +
               std::to_string(agg.missing) + " | ";
          if (agg.pass_percent) {
            t += detail::fixed(*agg.pass_percent, 2) + " | [" +
                 detail::fixed(*agg.wilson_low, 1) + ", " + detail::fixed(*agg.wilson_high, 1) +
                 "] |\n";
          } else {
            t += "- | - |\n";
          }
        }
      } else {
        t += "rule_id,guideline,ok,ko,missing,pass_percent,wilson_low,wilson_high\n";
        for (const auto& agg : m.guideline_aggregates) {
          t += std::to_string(agg.rule_id) + ",\"" + guideline_title(agg.rule_id) + "\"," +
               std::to_string(agg.ok) + "," + std::to_string(agg.ko) + "," +
               std::to_string(agg.missing) + ",";
          if (agg.pass_percent)
            t += detail::fixed(*agg.pass_percent, 4) + "," + detail::fixed(*agg.wilson_low, 4) +
                 "," + detail::fixed(*agg.wilson_high, 4);
          else
            t += ",,";
          t += "\n";
        }
      }
      detail::write_file(fs::path(out_dir) / ("guidelines_" + slug + ext), t, written);
    }

    if (!md) {  // per-record bundles, CSV only
      std::string t = "record_id,bleu,rouge_l,meteor,r_ged_percent,parse_ok,ged_exact\n";
      for (const auto& b : m.bundles) {
        t += "\"" + b.record_id + "\"," + detail::fixed(b.bleu, 4) + "," +
             detail::fixed(b.rouge_l, 4) + "," + detail::fixed(b.meteor, 4) + "," +
             detail::fixed(b.r_ged_percent, 4) + "," + (b.parse_ok ? "1" : "0") + "," +
             (b.ged_exact ? "1" : "0") + "\n";
      }
      detail::write_file(fs::path(out_dir) / ("bundles_" + slug + ".csv"), t, written);
    }
  }

  if (!rs.ranking.empty()) {
    std::string t;
    if (md) {
      t += "| Metric | Chi2 (df = " + std::to_string(rs.ranking.begin()->second.df) +
           ") | p-value | W | Models | Blocks |\n";
      t += "|---|---|---|---|---|---|\n";
      for (const auto& key : metric_keys()) {
        auto it = rs.ranking.find(key);
        if (it == rs.ranking.end()) continue;
        const auto& fr = it->second;
        t += "| " + metric_display(key) + " | " + detail::fixed(fr.chi2, 2) + " | " +
             (fr.p_value < 0.001 ? std::string("<0.001") : detail::fixed(fr.p_value, 3)) +
             " | " + detail::fixed(fr.w, 2) + " | " + std::to_string(fr.k_treatments) + " | " +
             std::to_string(fr.n_blocks) + " |\n";
      }
    } else {
      t += "metric,chi2,df,p_value,w,k_models,n_blocks\n";
      for (const auto& key : metric_keys()) {
        auto it = rs.ranking.find(key);
        if (it == rs.ranking.end()) continue;
        const auto& fr = it->second;
        t += key + "," + detail::fixed(fr.chi2, 4) + "," + std::to_string(fr.df) + "," +
             detail::fixed(fr.p_value, 6) + "," + detail::fixed(fr.w, 4) + "," +
             std::to_string(fr.k_treatments) + "," + std::to_string(fr.n_blocks) + "\n";
      }
    }
    detail::write_file(fs::path(out_dir) / ("ranking" + ext), t, written);
  }

  return written;
}

}  // namespace bpmeval
