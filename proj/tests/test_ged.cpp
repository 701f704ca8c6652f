#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "bpmeval/ged.hpp"
#include "bpmeval/prompts.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace bpmeval;

TEST_SUITE_BEGIN("ged");

TEST_CASE("label normalization for substitution") {
  CHECK(normalize_label("  Check   STOCK ") == "check stock");
  CHECK(normalize_label("") == "");
  CHECK(normalize_label("a\tb\nc") == "a b c");
}

TEST_CASE("distance to itself is zero and exact") {
  const ProcessGraph g = parse_dot(prompts::kSyntaxReferenceDot);
  const GedResult r = ged(g, g);
  CHECK(r.cost == 0.0);
  CHECK(r.exact);
}

TEST_CASE("distance to the empty graph is node count plus edge count") {
  const ProcessGraph g = parse_dot(prompts::kSyntaxReferenceDot);
  const ProcessGraph empty;
  CHECK(ged(g, empty).cost == 14.0);  // 7 nodes + 7 edges
  CHECK(ged(empty, g).cost == 14.0);
  CHECK(ged(empty, empty).cost == 0.0);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const ProcessGraph random = generators::random_small_graph(rng, 5);
    CHECK(ged(random, empty).cost == (double)(random.nodes.size() + random.edges.size()));
  }
}

TEST_CASE("single relabeled activity costs one substitution") {
  const ProcessGraph a = parse_dot("digraph g { a -> b }");
  const ProcessGraph b = parse_dot("digraph g { a -> c }");
  CHECK(ged(a, b).cost == 1.0);
  CHECK(oracles::brute_ged(a, b) == 1.0);
}

TEST_CASE("kind mismatch always costs a substitution") {
  // same label, different kinds: an activity never freely becomes a gateway
  const ProcessGraph activity = parse_dot("digraph g { x [shape=box label=\"+\"] }");
  const ProcessGraph gateway = parse_dot("digraph g { x [shape=diamond label=\"+\"] }");
  CHECK(ged(activity, gateway).cost == 1.0);
}

TEST_CASE("exact search agrees with the brute-force oracle") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 30; ++i) {
    const ProcessGraph a = generators::random_small_graph(rng, 4);
    const ProcessGraph b = generators::random_small_graph(rng, 4);
    const GedResult r = ged(a, b);
    REQUIRE(r.exact);
    CAPTURE(render_canonical(a));
    CAPTURE(render_canonical(b));
    CHECK(r.cost == doctest::Approx(oracles::brute_ged(a, b)));
  }
}

TEST_CASE("exact distances are symmetric and satisfy the triangle inequality") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    const ProcessGraph a = generators::random_small_graph(rng, 4);
    const ProcessGraph b = generators::random_small_graph(rng, 4);
    const ProcessGraph c = generators::random_small_graph(rng, 4);
    const GedResult ab = ged(a, b), ba = ged(b, a), ac = ged(a, c), cb = ged(c, b);
    REQUIRE(ab.exact);
    REQUIRE(ba.exact);
    CHECK(ab.cost == ba.cost);
    CHECK(ab.cost <= ac.cost + cb.cost + 1e-9);
  }
}

TEST_CASE("budget exhaustion degrades to a sound upper bound") {
  std::mt19937_64 rng(47);
  GedBudget no_budget;
  no_budget.max_states = 0;
  for (int i = 0; i < 30; ++i) {
    const ProcessGraph a = generators::random_small_graph(rng, 4);
    const ProcessGraph b = generators::random_small_graph(rng, 4);
    const GedResult r = ged(a, b, no_budget);
    if (!(a.empty() && b.empty())) CHECK_FALSE(r.exact);  // empty-empty is trivially exact
    CHECK(r.cost >= oracles::brute_ged(a, b) - 1e-9);
    CHECK(r.cost <= (double)(a.nodes.size() + a.edges.size() + b.nodes.size() + b.edges.size()));
  }
}

TEST_CASE("assignment solver matches exhaustive permutation search") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + (int)(rng() % 4);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (auto& row : cost)
      for (auto& v : row) v = (double)(rng() % 100) / 10.0;

    const auto assignment = detail::hungarian(cost);
    double got = 0.0;
    for (int i = 0; i < n; ++i) got += cost[i][assignment[i]];

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double best = 1e18;
    do {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += cost[i][perm[i]];
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("r_ged worked examples") {
  const ProcessGraph g = parse_dot(prompts::kSyntaxReferenceDot);
  CHECK(r_ged(g, g).value == 1.0);
  CHECK(r_ged(g, g).percent == 100.0);

  const ProcessGraph empty;
  CHECK(r_ged(g, empty).value == 0.0);
  CHECK(r_ged(empty, empty).value == 1.0);  // defined as a perfect match

  const ProcessGraph ref = parse_dot("digraph g { a -> b }");
  const ProcessGraph gen = parse_dot("digraph g { a b }");
  const RGedScore score = r_ged(ref, gen);
  CHECK(score.value == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(score.percent == doctest::Approx(80.0).epsilon(1e-12));
}

TEST_CASE("r_ged stays in range and detects identity") {
  std::mt19937_64 rng(59);
  for (int i = 0; i < 30; ++i) {
    const ProcessGraph a = generators::random_small_graph(rng, 4);
    const ProcessGraph b = generators::random_small_graph(rng, 4);
    const GedResult d = ged(a, b);
    const RGedScore s = r_ged_from_cost(d.cost, a, b);
    CHECK(s.value >= 0.0);
    CHECK(s.value <= 1.0);
    CHECK(s.percent == doctest::Approx(100.0 * s.value));
    if (d.exact) CHECK((s.value == 1.0) == (d.cost == 0.0));
  }
}

TEST_SUITE_END();
