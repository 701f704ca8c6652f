// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bpmeval/bpmn_xml.hpp"
#include "bpmeval/dataset.hpp"
#include "bpmeval/dot.hpp"
#include "bpmeval/ged.hpp"
#include "bpmeval/guidelines.hpp"
#include "bpmeval/prompts.hpp"
#include "bpmeval/stats.hpp"
#include "bpmeval/text_metrics.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace bpmeval;

namespace {

int failures = 0;

void report(int criterion, const std::string& what, bool ok, const std::string& detail = "") {
  std::printf("%s criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

bool check_all(std::vector<std::pair<bool, std::string>>& checks, std::string& first_failure) {
  for (const auto& [ok, message] : checks)
    if (!ok) {
      first_failure = message;
      return false;
    }
  return true;
}

// ---- criterion 1: Kendall's W identity --------------------------------
void criterion_1() {
  const struct {
    double chi2;
    double expected_w;
  } rows[] = {{1862.52, 0.81}, {1506.76, 0.65}, {1727.50, 0.75}, {1702.32, 0.74}};
  bool ok = true;
  std::string detail;
  for (const auto& row : rows) {
    const double w = kendalls_w(row.chi2, 177, 14);
    if (std::fabs(w - row.expected_w) > 0.005) {
      ok = false;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "chi2=%.2f gave W=%.4f, expected %.2f", row.chi2, w,
                    row.expected_w);
      detail = buf;
      break;
    }
  }
  report(1, "Kendall's W identity reproduces the reported concordance values", ok, detail);
}

// ---- criterion 2: guideline aggregation arithmetic ---------------------
GuidelineReport synthetic_report(RuleStatus status) {
  GuidelineReport r;
  for (int id : kGuidelineRuleIds) r.verdicts[id] = status;
  return r;
}

void criterion_2() {
  const struct {
    long ok_count;
    long ko_count;
    double expected;
  } rows[] = {{179, 0, 100.0}, {0, 179, 0.0},  {173, 6, 96.65},
              {175, 4, 97.77}, {178, 1, 99.44}, {79, 100, 44.13}};
  bool ok = true;
  std::string detail;
  for (const auto& row : rows) {
    std::vector<GuidelineReport> reports;
    for (long i = 0; i < row.ok_count; ++i) reports.push_back(synthetic_report(RuleStatus::WellDone));
    for (long i = 0; i < row.ko_count; ++i) reports.push_back(synthetic_report(RuleStatus::Violated));
    const auto aggregates = aggregate_reports(reports);
    for (const auto& agg : aggregates) {
      if (std::fabs(*agg.pass_percent - row.expected) >= 0.005) {
        ok = false;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "(%ld,%ld) gave %.4f, expected %.2f", row.ok_count,
                      row.ko_count, *agg.pass_percent, row.expected);
        detail = buf;
      }
    }
    if (!ok) break;
  }
  report(2, "pass-rate arithmetic matches the reference counts to two decimals", ok, detail);
}

// ---- criterion 3: tie law on a synthetic corpus -------------------------
void criterion_3() {
  std::mt19937_64 rng(1003);
  std::vector<GuidelineReport> reports;
  for (int i = 0; i < 150; ++i) {
    const ProcessGraph g = generators::random_process_graph(rng);
    reports.push_back(verify_model(g, {}, "synthetic_" + std::to_string(i)));
  }
  const auto aggregates = aggregate_reports(reports);
  std::map<int, const RuleAggregate*> by_rule;
  for (const auto& agg : aggregates) by_rule[agg.rule_id] = &agg;

  std::vector<std::pair<bool, std::string>> checks;
  checks.emplace_back(*by_rule.at(22)->pass_percent == *by_rule.at(34)->pass_percent,
                      "rules 22 and 34 disagree");
  checks.emplace_back(by_rule.at(22)->ok == by_rule.at(34)->ok, "rule 22/34 OK counts differ");
  checks.emplace_back(by_rule.at(22)->ko > 0, "corpus has no exclusive splits");
  checks.emplace_back(by_rule.at(22)->ok > 0, "corpus has only exclusive splits");
  for (int rule : {24, 30, 47})
    checks.emplace_back(*by_rule.at(rule)->pass_percent == 100.0,
                        "rule " + std::to_string(rule) + " not at 100%");
  std::string detail;
  const bool ok = check_all(checks, detail);
  report(3, "rule 22/34 tie law and vacuous passes hold on 150 synthetic diagrams", ok, detail);
}

// ---- criterion 4: exact GED equals the brute-force oracle ---------------
void criterion_4() {
  const auto started = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1004);
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 50 && ok; ++i) {
    const ProcessGraph a = generators::random_small_graph(rng, 4);
    const ProcessGraph b = generators::random_small_graph(rng, 4);
    const GedResult r = ged(a, b);
    const double expected = oracles::brute_ged(a, b);
    if (!r.exact || std::fabs(r.cost - expected) > 1e-9) {
      ok = false;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "pair %d: got %.1f (exact=%d), oracle %.1f", i, r.cost,
                    (int)r.exact, expected);
      detail = buf;
    }
  }

  const RGedScore worked =
      r_ged(parse_dot("digraph g { a -> b }"), parse_dot("digraph g { a b }"));
  if (std::fabs(worked.value - 0.8000) > 1e-9) {
    ok = false;
    detail = "worked example returned " + std::to_string(worked.value);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (seconds >= 10.0) {
    ok = false;
    detail = "took " + std::to_string(seconds) + "s (budget 10s)";
  }
  report(4, "A* GED matches exhaustive edit-path enumeration on 50 pairs; R-GED example = 0.8000",
         ok, detail);
}

// ---- criterion 5: metric properties -------------------------------------
void criterion_5() {
  const auto started = std::chrono::steady_clock::now();
  std::vector<std::pair<bool, std::string>> checks;

  const TokenSequence seq{"digraph", "g", "{", "a", "->", "b", "}"};
  checks.emplace_back(bleu(seq, seq) == 100.0, "identical BLEU != 100");
  checks.emplace_back(rouge_l(seq, seq) == 100.0, "identical ROUGE-L != 100");

  for (int m : {1, 2, 3, 4, 6, 10, 25}) {
    TokenSequence tokens;
    for (int i = 0; i < m; ++i) tokens.push_back("t" + std::to_string(i));
    const double expected = 100.0 * (1.0 - 0.5 / ((double)m * m * m));
    checks.emplace_back(std::fabs(meteor(tokens, tokens) - expected) < 1e-6,
                        "METEOR identity formula off at m=" + std::to_string(m));
  }

  std::mt19937_64 rng(1005);
  for (int i = 0; i < 200; ++i) {
    const auto cand = generators::random_tokens(rng, 10, 4);
    const auto ref = generators::random_tokens(rng, 10, 4);
    const int lcs = oracles::brute_lcs(cand, ref);
    const double p = (double)lcs / (double)cand.size();
    const double r = (double)lcs / (double)ref.size();
    const double expected = lcs == 0 ? 0.0 : 100.0 * 2.0 * p * r / (p + r);
    if (std::fabs(rouge_l(cand, ref) - expected) > 1e-9) {
      checks.emplace_back(false, "ROUGE-L diverges from the LCS oracle at pair " +
                                     std::to_string(i));
      break;
    }
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  checks.emplace_back(seconds < 5.0, "took longer than 5s");
  std::string detail;
  const bool ok = check_all(checks, detail);
  report(5, "BLEU/ROUGE-L/METEOR identities and the brute-force LCS oracle", ok, detail);
}

// ---- criterion 6: BPMN round-trip ----------------------------------------
void criterion_6() {
  std::mt19937_64 rng(1006);
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 150 && ok; ++i) {
    generators::GraphGenOptions opts;
    opts.adversarial = i % 2 == 0;
    const ProcessGraph g = generators::random_process_graph(rng, opts);
    const RoundTripResult rt = round_trip_check(g);
    if (!rt.ok) {
      ok = false;
      detail = "diagram " + std::to_string(i) + ": " + rt.reason;
    }
  }

  const BpmnDocument doc = to_bpmn_xml(parse_dot(prompts::kSyntaxReferenceDot));
  int parallel = 0, tasks = 0;
  for (const auto& [id, kind] : doc.element_index) {
    if (kind == "parallelGateway") ++parallel;
    if (kind == "task") ++tasks;
  }
  if (parallel != 2 || tasks != 3) {
    ok = false;
    detail = "sample graph converted to " + std::to_string(parallel) + " parallel gateways and " +
             std::to_string(tasks) + " tasks";
  }
  report(6, "100% BPMN XML round-trip on 150 synthetic diagrams; sample graph element counts", ok,
         detail);
}

// ---- criterion 7: stratified sampling ------------------------------------
void criterion_7() {
  const auto corpus = generators::tercile_corpus(15, 30);
  const SampleResult first = stratified_sample(corpus, 4, 777);
  const SampleResult second = stratified_sample(corpus, 4, 777);

  std::vector<std::pair<bool, std::string>> checks;
  checks.emplace_back(first.selected.size() == 180,
                      "selected " + std::to_string(first.selected.size()) + " records");

  std::map<std::string, int> per_domain;
  std::map<std::string, std::array<int, 3>> per_bucket;
  for (const auto& rec : first.selected) {
    per_domain[rec.domain]++;
    const int nodes = (int)parse_dot(rec.reference_dot).nodes.size();
    per_bucket[rec.domain][nodes <= 10 ? 0 : nodes <= 21 ? 1 : 2]++;
  }
  checks.emplace_back(per_domain.size() == 15, "domain count off");
  for (const auto& [domain, count] : per_domain)
    checks.emplace_back(count == 12, domain + " has " + std::to_string(count));
  for (const auto& [domain, buckets] : per_bucket)
    checks.emplace_back(buckets[0] == 4 && buckets[1] == 4 && buckets[2] == 4,
                        domain + " terciles uneven");

  bool same = first.selected.size() == second.selected.size();
  for (size_t i = 0; same && i < first.selected.size(); ++i)
    same = first.selected[i].id == second.selected[i].id;
  checks.emplace_back(same, "same seed produced different selections");

  std::string detail;
  const bool ok = check_all(checks, detail);
  report(7, "stratified sampling yields 180 records, 12 per domain, 4 per tercile, reproducibly",
         ok, detail);
}

// ---- criterion 8: statistics ---------------------------------------------
void criterion_8() {
  std::vector<std::pair<bool, std::string>> checks;

  checks.emplace_back(wilson_interval(179, 179, 0.95).high == 1.0,
                      "Wilson upper bound at p-hat = 1 is not exactly 1.0");

  const double sf = chi_square_sf(2.0 * std::log(2.0), 2);
  checks.emplace_back(std::fabs(sf - 0.5) < 1e-9, "chi-square sf(2 ln 2, 2) != 0.5");

  const Interval constant = bootstrap_ci({5.0, 5.0, 5.0}, 2000, 0.95, 8);
  checks.emplace_back(constant.point == 5.0 && constant.low == 5.0 && constant.high == 5.0,
                      "constant-data bootstrap interval is not degenerate");

  const FriedmanResult fr = friedman_test({{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
  checks.emplace_back(std::fabs(fr.chi2 - 4.0) < 1e-9, "concordant Friedman chi2 != 4");
  checks.emplace_back(std::fabs(fr.w - 1.0) < 1e-9, "concordant Kendall W != 1");

  std::string detail;
  const bool ok = check_all(checks, detail);
  report(8, "Wilson boundary, chi-square closed form, degenerate bootstrap, concordant Friedman",
         ok, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf(
      "NOTE criterion 9: absolute benchmark scores, prompt-ablation deltas, quantization sweeps, "
      "and externally printed interval endpoints are out of scope by design; criteria 1-8 stand "
      "in for them.\n");
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  else std::printf("all criteria passed\n");
  return failures == 0 ? 0 : 1;
}
