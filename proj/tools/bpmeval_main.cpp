// Command-line front end for the BPMN-as-DOT evaluation toolkit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bpmeval/bpmn_xml.hpp"
#include "bpmeval/dataset.hpp"
#include "bpmeval/dot.hpp"
#include "bpmeval/ged.hpp"
#include "bpmeval/guidelines.hpp"
#include "bpmeval/harness.hpp"
#include "bpmeval/http_client.hpp"
#include "bpmeval/prompts.hpp"
#include "bpmeval/stats.hpp"
#include "bpmeval/text_metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bpmeval::IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bpmeval::IoError("cannot write " + path);
  out << content;
}

std::vector<double> read_values_csv(const std::string& path) {
  std::vector<double> values;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      const std::string t = bpmeval::detail::trim(cell);
      if (t.empty()) continue;
      try {
        values.push_back(std::stod(t));
      } catch (const std::exception&) {
        if (values.empty()) continue;  // tolerate a header row
        throw bpmeval::ParseError(path + ": non-numeric cell '" + t + "'");
      }
    }
  }
  return values;
}

std::vector<std::vector<double>> read_matrix_csv(const std::string& path) {
  std::vector<std::vector<double>> matrix;
  std::istringstream in(read_file(path));
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (bpmeval::detail::trim(line).empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      const std::string t = bpmeval::detail::trim(cell);
      if (t.empty()) continue;
      try {
        row.push_back(std::stod(t));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw bpmeval::ParseError(path + ": non-numeric row '" + line + "'");
    }
    first = false;
    if (!row.empty()) matrix.push_back(std::move(row));
  }
  return matrix;
}

json interval_to_json(const bpmeval::Interval& ci) {
  return json{{"point", ci.point},
              {"low", ci.low},
              {"high", ci.high},
              {"confidence", ci.confidence},
              {"point_contained", ci.point_contained}};
}

const char* status_name(bpmeval::RuleStatus s) {
  switch (s) {
    case bpmeval::RuleStatus::WellDone: return "well_done";
    case bpmeval::RuleStatus::Violated: return "violated";
    case bpmeval::RuleStatus::Missing: return "missing";
  }
  return "unknown";
}

std::string aggregates_markdown(const std::vector<bpmeval::RuleAggregate>& aggs) {
  std::string t = "| ID | Guideline | OK | KO | Missing | Pass (%) | Wilson 95% CI |\n";
  t += "|---|---|---|---|---|---|---|\n";
  char buf[64];
  for (const auto& agg : aggs) {
    t += "| " + std::to_string(agg.rule_id) + " | " + bpmeval::guideline_title(agg.rule_id) +
         " | " + std::to_string(agg.ok) + " | " + std::to_string(agg.ko) + " | " +
         std::to_string(agg.missing) + " | ";
    if (agg.pass_percent) {
      std::snprintf(buf, sizeof(buf), "%.2f | [%.1f, %.1f] |\n", *agg.pass_percent,
                    *agg.wilson_low, *agg.wilson_high);
      t += buf;
    } else {
      t += "- | - |\n";
    }
  }
  return t;
}

std::string aggregates_csv(const std::vector<bpmeval::RuleAggregate>& aggs) {
  std::string t = "rule_id,guideline,ok,ko,missing,pass_percent,wilson_low,wilson_high\n";
  char buf[64];
  for (const auto& agg : aggs) {
    t += std::to_string(agg.rule_id) + ",\"" + bpmeval::guideline_title(agg.rule_id) + "\"," +
         std::to_string(agg.ok) + "," + std::to_string(agg.ko) + "," +
         std::to_string(agg.missing) + ",";
    if (agg.pass_percent) {
      std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.4f", *agg.pass_percent, *agg.wilson_low,
                    *agg.wilson_high);
      t += buf;
    } else {
      t += ",,";
    }
    t += "\n";
  }
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation toolkit for BPMN process models generated as DOT digraphs"};
  app.require_subcommand(1);

  // ---- sanitize -------------------------------------------------------
  std::string san_in, san_out;
  auto* sanitize_cmd = app.add_subcommand("sanitize", "Clean up model-emitted DOT text");
  sanitize_cmd->add_option("input", san_in, "input .dot file")->required();
  sanitize_cmd->add_option("-o,--output", san_out, "output file (default: stdout)");

  // ---- parse ----------------------------------------------------------
  std::string parse_in;
  bool parse_stats = false;
  auto* parse_cmd = app.add_subcommand("parse", "Parse DOT and report the typed graph");
  parse_cmd->add_option("input", parse_in, "input .dot file")->required();
  parse_cmd->add_flag("--stats", parse_stats, "print node/edge/gateway counts");

  // ---- ged ------------------------------------------------------------
  std::string ged_ref, ged_cand;
  bpmeval::GedBudget ged_budget;
  auto* ged_cmd = app.add_subcommand("ged", "Graph edit distance and R-GED between two DOT files");
  ged_cmd->add_option("reference", ged_ref, "reference .dot file")->required();
  ged_cmd->add_option("candidate", ged_cand, "candidate .dot file")->required();
  ged_cmd->add_option("--budget-states", ged_budget.max_states, "A* expansion budget");
  ged_cmd->add_option("--budget-ms", ged_budget.max_millis, "time budget per pair (ms)");

  // ---- export ---------------------------------------------------------
  std::string export_in, export_out;
  auto* export_cmd = app.add_subcommand("export", "Convert DOT to BPMN 2.0 XML");
  export_cmd->add_option("input", export_in, "input .dot file")->required();
  export_cmd->add_option("-o,--output", export_out, "output .bpmn file")->required();

  // ---- guidelines -----------------------------------------------------
  std::string gl_in, gl_report = "guidelines.json", gl_use = "auto";
  bpmeval::GuidelineOptions gl_opts;
  auto* gl_cmd = app.add_subcommand("guidelines",
                                    "Verify understandability guidelines over diagrams");
  gl_cmd->add_option("input", gl_in, "directory of .dot files or a corpus .jsonl")->required();
  gl_cmd->add_option("--report", gl_report, "output report path (.json; .csv/.md siblings)");
  gl_cmd->add_option("--threshold", gl_opts.size_threshold, "size threshold for rules 2/3");
  gl_cmd->add_option("--use", gl_use, "which DOT to verify from jsonl: auto|reference|candidate")
      ->check(CLI::IsMember({"auto", "reference", "candidate"}));

  // ---- filter ---------------------------------------------------------
  std::string fl_in, fl_out, fl_rejects;
  bpmeval::FilterConfig fl_cfg;
  bool fl_keep_dup = false, fl_keep_disc = false;
  auto* fl_cmd = app.add_subcommand("filter", "Filter a corpus per the dataset hygiene rules");
  fl_cmd->add_option("input", fl_in, "corpus .jsonl")->required();
  fl_cmd->add_option("-o,--output", fl_out, "kept records .jsonl")->required();
  fl_cmd->add_option("--rejects", fl_rejects, "rejected records .jsonl");
  fl_cmd->add_option("--token-limit", fl_cfg.token_limit, "input token budget");
  fl_cmd->add_flag("--keep-duplicates", fl_keep_dup, "skip duplicate detection");
  fl_cmd->add_flag("--keep-disconnected", fl_keep_disc, "skip connectivity check");

  // ---- sample ---------------------------------------------------------
  std::string sm_in, sm_out;
  int sm_per_bucket = 4;
  uint64_t sm_seed = 42;
  auto* sm_cmd = app.add_subcommand("sample", "Stratified benchmark sampling by node-count terciles");
  sm_cmd->add_option("input", sm_in, "corpus .jsonl")->required();
  sm_cmd->add_option("-o,--output", sm_out, "sampled records .jsonl")->required();
  sm_cmd->add_option("--per-bucket", sm_per_bucket, "records per domain tercile");
  sm_cmd->add_option("--seed", sm_seed, "sampling seed");

  // ---- corpus-stats ---------------------------------------------------
  std::string cs_in;
  auto* cs_cmd = app.add_subcommand("corpus-stats", "Mean nodes/edges/gateways/words/sentences");
  cs_cmd->add_option("input", cs_in, "corpus .jsonl")->required();

  // ---- stats ----------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "Statistical utilities");
  stats_cmd->require_subcommand(1);

  long ws_k = 0, ws_n = 0;
  double ws_conf = 0.95;
  auto* wilson_cmd = stats_cmd->add_subcommand("wilson", "Wilson score interval");
  wilson_cmd->add_option("successes", ws_k, "success count")->required();
  wilson_cmd->add_option("trials", ws_n, "trial count")->required();
  wilson_cmd->add_option("--confidence", ws_conf, "confidence level");

  std::string bs_in;
  int bs_resamples = 10000;
  uint64_t bs_seed = 42;
  double bs_conf = 0.95;
  auto* boot_cmd = stats_cmd->add_subcommand("bootstrap", "Percentile bootstrap CI of the mean");
  boot_cmd->add_option("values", bs_in, "CSV of numbers")->required();
  boot_cmd->add_option("--resamples", bs_resamples, "bootstrap resamples");
  boot_cmd->add_option("--seed", bs_seed, "resampling seed");
  boot_cmd->add_option("--confidence", bs_conf, "confidence level");

  std::string fr_in;
  auto* fr_cmd = stats_cmd->add_subcommand("friedman", "Friedman test with Kendall's W");
  fr_cmd->add_option("matrix", fr_in, "CSV matrix, blocks x treatments")->required();

  // ---- infer ----------------------------------------------------------
  std::string inf_in, inf_out = "candidates.jsonl", inf_endpoint, inf_mode = "tuned";
  bpmeval::EndpointConfig inf_cfg;
  bpmeval::DecodingConfig inf_decoding;
  auto* inf_cmd = app.add_subcommand("infer", "Generate candidates via a chat-completion endpoint");
  inf_cmd->add_option("corpus", inf_in, "corpus .jsonl")->required();
  inf_cmd->add_option("--endpoint", inf_endpoint, "base URL, e.g. http://localhost:8000")
      ->required();
  inf_cmd->add_option("--path", inf_cfg.path, "request path");
  inf_cmd->add_option("--model", inf_cfg.model, "model name sent in the request body");
  inf_cmd->add_option("--mode", inf_mode, "prompt mode: tuned|assisted|cot|tot")
      ->check(CLI::IsMember({"tuned", "assisted", "cot", "tot"}));
  inf_cmd->add_option("-o,--output", inf_out, "candidates .jsonl");
  inf_cmd->add_option("--temperature", inf_decoding.temperature, "sampling temperature");
  inf_cmd->add_option("--top-p", inf_decoding.top_p, "nucleus sampling threshold");
  inf_cmd->add_option("--max-tokens", inf_decoding.max_new_tokens, "generation length cap");
  inf_cmd->add_option("--timeout", inf_cfg.timeout_seconds, "request timeout (s)");
  inf_cmd->add_option("--api-key-env", inf_cfg.api_key_env,
                      "environment variable holding the bearer token");

  // ---- eval -----------------------------------------------------------
  std::string ev_in, ev_dir = "reports";
  std::vector<std::string> ev_candidates;
  bpmeval::EvalOptions ev_opts;
  auto* ev_cmd = app.add_subcommand("eval", "Score candidate runs against the corpus");
  ev_cmd->add_option("corpus", ev_in, "corpus .jsonl")->required();
  ev_cmd->add_option("--candidates", ev_candidates, "candidate .jsonl file per model run")
      ->required()
      ->expected(-1);
  ev_cmd->add_option("--report-dir", ev_dir, "output directory");
  ev_cmd->add_option("--seed", ev_opts.seed, "bootstrap seed");
  ev_cmd->add_option("--resamples", ev_opts.bootstrap_resamples, "bootstrap resamples");
  ev_cmd->add_option("--budget-states", ev_opts.budget.max_states, "GED A* budget");
  ev_cmd->add_option("--budget-ms", ev_opts.budget.max_millis, "GED time budget (ms)");
  ev_cmd->add_option("--threshold", ev_opts.guidelines.size_threshold,
                     "guideline size threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sanitize_cmd) {
      const std::string cleaned = bpmeval::sanitize_dot(read_file(san_in));
      if (san_out.empty()) std::cout << cleaned;
      else write_file(san_out, cleaned);
      return 0;
    }

    if (*parse_cmd) {
      std::vector<std::string> warnings;
      const auto g = bpmeval::parse_dot(read_file(parse_in), &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      if (parse_stats) {
        const auto s = bpmeval::graph_stats(g);
        std::cout << "nodes: " << s.node_count << "\nedges: " << s.edge_count
                  << "\ngateways: " << s.gateway_count << '\n';
      } else {
        std::cout << bpmeval::render_canonical(g);
      }
      return 0;
    }

    if (*ged_cmd) {
      const auto ref = bpmeval::parse_dot(bpmeval::sanitize_dot(read_file(ged_ref)));
      const auto cand = bpmeval::parse_dot(bpmeval::sanitize_dot(read_file(ged_cand)));
      const auto result = bpmeval::ged(ref, cand, ged_budget);
      const auto score = bpmeval::r_ged_from_cost(result.cost, ref, cand);
      std::cout << "cost: " << result.cost << '\n'
                << "exact: " << (result.exact ? "true" : "false") << '\n'
                << "expanded_states: " << result.expanded_states << '\n';
      std::printf("r_ged_percent: %.2f\n", score.percent);
      return 0;
    }

    if (*export_cmd) {
      const auto g = bpmeval::parse_dot(bpmeval::sanitize_dot(read_file(export_in)));
      write_file(export_out, bpmeval::to_bpmn_xml(g).xml);
      return 0;
    }

    if (*gl_cmd) {
      std::vector<bpmeval::GuidelineReport> reports;
      auto verify_text = [&](const std::string& id, const std::string& dot) {
        try {
          reports.push_back(
              bpmeval::verify_model(bpmeval::parse_dot(bpmeval::sanitize_dot(dot)), gl_opts, id));
        } catch (const bpmeval::ParseError& e) {
          reports.push_back(bpmeval::all_missing_report(id, e.what()));
        }
      };
      if (fs::is_directory(gl_in)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(gl_in))
          if (entry.path().extension() == ".dot") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) verify_text(f.stem().string(), read_file(f.string()));
      } else {
        for (const auto& rec : bpmeval::read_jsonl(gl_in)) {
          const bool use_candidate =
              gl_use == "candidate" || (gl_use == "auto" && rec.candidate_dot.has_value());
          if (use_candidate && !rec.candidate_dot) {
            reports.push_back(bpmeval::all_missing_report(rec.id, "record has no candidate"));
            continue;
          }
          verify_text(rec.id, use_candidate ? *rec.candidate_dot : rec.reference_dot);
        }
      }
      if (reports.empty()) throw bpmeval::EmptyInput("no diagrams found in " + gl_in);
      const auto aggregates = bpmeval::aggregate_reports(reports);

      json out;
      out["diagrams"] = json::array();
      for (const auto& r : reports) {
        json d{{"id", r.diagram_id}, {"verdicts", json::object()}, {"notes", json::object()}};
        for (const auto& [rule, status] : r.verdicts) {
          d["verdicts"][std::to_string(rule)] = status_name(status);
          d["notes"][std::to_string(rule)] = r.notes.at(rule);
        }
        out["diagrams"].push_back(d);
      }
      out["aggregates"] = json::array();
      for (const auto& agg : aggregates) {
        json a{{"rule_id", agg.rule_id},
               {"guideline", bpmeval::guideline_title(agg.rule_id)},
               {"ok", agg.ok},
               {"ko", agg.ko},
               {"missing", agg.missing}};
        if (agg.pass_percent) {
          a["pass_percent"] = *agg.pass_percent;
          a["wilson_low"] = *agg.wilson_low;
          a["wilson_high"] = *agg.wilson_high;
        }
        out["aggregates"].push_back(a);
      }
      write_file(gl_report, out.dump(2) + "\n");
      const fs::path base = fs::path(gl_report).replace_extension();
      write_file(base.string() + ".csv", aggregates_csv(aggregates));
      write_file(base.string() + ".md", aggregates_markdown(aggregates));
      std::cout << "verified " << reports.size() << " diagram(s); reports at " << gl_report
                << '\n';
      return 0;
    }

    if (*fl_cmd) {
      fl_cfg.drop_duplicates = !fl_keep_dup;
      fl_cfg.drop_disconnected = !fl_keep_disc;
      const auto records = bpmeval::read_jsonl(fl_in);
      const auto result = bpmeval::filter_corpus(records, fl_cfg);
      bpmeval::write_jsonl(fl_out, result.kept);
      if (!fl_rejects.empty()) {
        std::ofstream out(fl_rejects);
        if (!out) throw bpmeval::IoError("cannot write " + fl_rejects);
        for (const auto& [rec, reason] : result.rejected) {
          json j = bpmeval::record_to_json(rec);
          j["reason"] = bpmeval::rejection_name(reason);
          out << j.dump() << '\n';
        }
      }
      std::cout << "kept " << result.kept.size() << ", rejected " << result.rejected.size()
                << '\n';
      return 0;
    }

    if (*sm_cmd) {
      const auto records = bpmeval::read_jsonl(sm_in);
      const auto result = bpmeval::stratified_sample(records, sm_per_bucket, sm_seed);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      bpmeval::write_jsonl(sm_out, result.selected);
      std::cout << "sampled " << result.selected.size() << " record(s)\n";
      return 0;
    }

    if (*cs_cmd) {
      const auto s = bpmeval::corpus_stats(bpmeval::read_jsonl(cs_in));
      json out{{"records", s.record_count},
               {"mean_nodes", s.mean_nodes},
               {"mean_edges", s.mean_edges},
               {"mean_gateways", s.mean_gateways},
               {"mean_words", s.mean_words},
               {"mean_sentences", s.mean_sentences}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*wilson_cmd) {
      const auto ci = bpmeval::wilson_interval(ws_k, ws_n, ws_conf);
      std::cout << interval_to_json(ci).dump(2) << '\n';
      return 0;
    }

    if (*boot_cmd) {
      const auto values = read_values_csv(bs_in);
      const auto ci = bpmeval::bootstrap_ci(values, bs_resamples, bs_conf, bs_seed);
      std::cout << interval_to_json(ci).dump(2) << '\n';
      return 0;
    }

    if (*fr_cmd) {
      const auto result = bpmeval::friedman_test(read_matrix_csv(fr_in));
      json out{{"chi2", result.chi2},          {"df", result.df},
               {"p_value", result.p_value},    {"w", result.w},
               {"n_blocks", result.n_blocks},  {"k_treatments", result.k_treatments}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*inf_cmd) {
      inf_cfg.base_url = inf_endpoint;
      const bpmeval::PromptMode mode = inf_mode == "assisted"
                                           ? bpmeval::PromptMode::AssistedZeroShot
                                       : inf_mode == "cot" ? bpmeval::PromptMode::ChainOfThought
                                       : inf_mode == "tot" ? bpmeval::PromptMode::TreeOfThought
                                                           : bpmeval::PromptMode::TunedZeroShot;
      const auto policy = (mode == bpmeval::PromptMode::ChainOfThought ||
                           mode == bpmeval::PromptMode::TreeOfThought)
                              ? bpmeval::ExtractPolicy::LastBlock
                              : bpmeval::ExtractPolicy::FirstBlock;
      const auto records = bpmeval::read_jsonl(inf_in);
      std::ofstream out(inf_out);
      if (!out) throw bpmeval::IoError("cannot write " + inf_out);
      size_t ok = 0;
      for (const auto& rec : records) {
        json j{{"id", rec.id}};
        try {
          const std::string prompt = bpmeval::build_prompt(mode, rec.description);
          const std::string completion =
              bpmeval::generate_completion(inf_cfg, prompt, inf_decoding);
          j["candidate_dot"] = bpmeval::extract_dot(completion, policy);
          ++ok;
        } catch (const bpmeval::NoDiagramFound& e) {
          j["candidate_dot"] = "";
          j["error"] = e.what();
        }
        out << j.dump() << '\n';
      }
      std::cout << "generated " << ok << "/" << records.size() << " candidate(s) -> " << inf_out
                << '\n';
      return 0;
    }

    if (*ev_cmd) {
      const auto records = bpmeval::read_jsonl(ev_in);
      std::map<std::string, bpmeval::CandidateSource> runs;
      for (const auto& path : ev_candidates) {
        bpmeval::CandidateSource source;
        std::istringstream in(read_file(path));
        std::string line;
        while (std::getline(in, line)) {
          if (bpmeval::detail::trim(line).empty()) continue;
          const json j = json::parse(line);
          source[j.at("id").get<std::string>()] = j.value("candidate_dot", "");
        }
        runs[fs::path(path).stem().string()] = std::move(source);
      }
      const auto report_set = bpmeval::run_evaluation(records, runs, ev_opts);
      auto files = bpmeval::emit_reports(report_set, bpmeval::ReportFormat::Markdown, ev_dir);
      auto csv = bpmeval::emit_reports(report_set, bpmeval::ReportFormat::Csv, ev_dir);
      files.insert(files.end(), csv.begin(), csv.end());
      for (const auto& f : files) std::cout << f << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
