#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "bpmeval/dot.hpp"

namespace bpmeval {

struct GedBudget {
  long max_states = 10000;  // A* expansions before falling back
  long max_millis = 2000;   // wall-clock cap per pair
};

struct GedResult {
  double cost = 0.0;
  bool exact = true;       // false when only the bipartite upper bound was reached
  long expanded_states = 0;
};

struct RGedScore {
  double value = 0.0;    // in [0, 1]
  double percent = 0.0;  // 100 * value
};

/// Lowercase, trim, collapse internal whitespace. Node substitution is free
/// only between nodes whose kinds and normalized labels both match.
inline std::string normalize_label(const std::string& label) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : label) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += (char)std::tolower(c);
  }
  return out;
}

namespace detail {

struct GedView {
  int n = 0;
  std::vector<std::tuple<int, int, int, std::string>> attrs;  // type, gw type, gw role, label
  std::vector<std::vector<int>> adj;                          // directed edge counts
  int edge_total = 0;

  explicit GedView(const ProcessGraph& g) {
    n = (int)g.nodes.size();
    adj.assign(n, std::vector<int>(n, 0));
    std::map<std::string, int> index;
    for (int i = 0; i < n; ++i) {
      const auto& node = g.nodes[i];
      index[node.id] = i;
      int gw_type = node.is_gateway() ? (int)node.gateway_type : -1;
      int gw_role = node.is_gateway() ? (int)node.gateway_role : -1;
      attrs.emplace_back((int)node.type, gw_type, gw_role, normalize_label(node.label));
    }
    for (const auto& e : g.edges) {
      adj[index.at(e.from)][index.at(e.to)]++;
      ++edge_total;
    }
  }
};

inline int subst_cost(const GedView& a, int i, const GedView& b, int j) {
  return a.attrs[i] == b.attrs[j] ? 0 : 1;
}

// True edit cost induced by a complete node mapping (-1 = delete).
inline double mapping_cost(const GedView& a, const GedView& b, const std::vector<int>& f) {
  double cost = 0.0;
  std::vector<bool> used(b.n, false);
  for (int i = 0; i < a.n; ++i) {
    if (f[i] < 0) {
      cost += 1.0;
    } else {
      cost += subst_cost(a, i, b, f[i]);
      used[f[i]] = true;
    }
  }
  for (int j = 0; j < b.n; ++j)
    if (!used[j]) cost += 1.0;

  std::map<std::pair<int, int>, int> image;
  for (int u = 0; u < a.n; ++u)
    for (int v = 0; v < a.n; ++v)
      if (a.adj[u][v] > 0 && f[u] >= 0 && f[v] >= 0)
        image[{f[u], f[v]}] += a.adj[u][v];

  int matched = 0;
  for (const auto& [key, count] : image)
    matched += std::min(count, b.adj[key.first][key.second]);
  cost += (a.edge_total - matched) + (b.edge_total - matched);
  return cost;
}

// Solves the square assignment problem; returns row -> column.
inline std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = (int)cost.size();
  const int m = n == 0 ? 0 : (int)cost[0].size();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  const double inf = 1e18;
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> result(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] > 0) result[p[j] - 1] = j - 1;
  return result;
}

// Riesen-Bunke style assignment upper bound: solve a bipartite problem over
// nodes plus deletion/insertion slots, then take the true cost of the mapping
// it induces.
inline double bipartite_upper_bound(const GedView& a, const GedView& b) {
  const int n1 = a.n, n2 = b.n;
  const double inf = 1e18;
  if (n1 == 0 && n2 == 0) return 0.0;

  std::vector<int> din1(n1, 0), dout1(n1, 0), din2(n2, 0), dout2(n2, 0);
  for (int u = 0; u < n1; ++u)
    for (int v = 0; v < n1; ++v) {
      dout1[u] += a.adj[u][v];
      din1[v] += a.adj[u][v];
    }
  for (int u = 0; u < n2; ++u)
    for (int v = 0; v < n2; ++v) {
      dout2[u] += b.adj[u][v];
      din2[v] += b.adj[u][v];
    }

  const int size = n1 + n2;
  std::vector<std::vector<double>> cost(size, std::vector<double>(size, inf));
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      cost[i][j] = subst_cost(a, i, b, j) +
                   0.5 * (std::abs(dout1[i] - dout2[j]) + std::abs(din1[i] - din2[j]));
  for (int i = 0; i < n1; ++i)
    cost[i][n2 + i] = 1.0 + 0.5 * (dout1[i] + din1[i]);
  for (int j = 0; j < n2; ++j)
    cost[n1 + j][j] = 1.0 + 0.5 * (dout2[j] + din2[j]);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) cost[n1 + j][n2 + i] = 0.0;

  auto assignment = hungarian(cost);
  std::vector<int> f(n1, -1);
  for (int i = 0; i < n1; ++i)
    if (assignment[i] < n2) f[i] = assignment[i];

  const double trivial = (double)(n1 + a.edge_total + n2 + b.edge_total);
  return std::min(mapping_cost(a, b, f), trivial);
}

struct AStarState {
  std::vector<int> assignment;  // G1 node -> G2 node or -1
  double g = 0.0;
};

}  // namespace detail

/// Graph edit distance under unit costs. Exact A* within the budget; on
/// exhaustion degrades to the bipartite assignment upper bound (exact=false).
inline GedResult ged(const ProcessGraph& ga, const ProcessGraph& gb,
                     const GedBudget& budget = {}) {
  using detail::GedView;
  const GedView a(ga), b(gb);
  const int n1 = a.n, n2 = b.n;

  GedResult result;
  if (n1 == 0 && n2 == 0) return result;

  // Pending-edge counts per depth: edges touching a not-yet-processed G1 node.
  std::vector<int> pend1(n1 + 1, 0);
  for (int d = 0; d <= n1; ++d)
    for (int u = 0; u < n1; ++u)
      for (int v = 0; v < n1; ++v)
        if (a.adj[u][v] > 0 && (u >= d || v >= d)) pend1[d] += a.adj[u][v];

  auto heuristic = [&](const detail::AStarState& s) {
    const int depth = (int)s.assignment.size();
    std::vector<bool> used(n2, false);
    for (int x : s.assignment)
      if (x >= 0) used[x] = true;

    std::map<std::tuple<int, int, int, std::string>, int> remaining1;
    for (int i = depth; i < n1; ++i) remaining1[a.attrs[i]]++;
    int r2 = 0, matched = 0;
    for (int j = 0; j < n2; ++j) {
      if (used[j]) continue;
      ++r2;
      auto it = remaining1.find(b.attrs[j]);
      if (it != remaining1.end() && it->second > 0) {
        --it->second;
        ++matched;
      }
    }
    const int r1 = n1 - depth;
    const double node_lb = std::max(r1, r2) - matched;

    int pend2 = 0;
    for (int u = 0; u < n2; ++u)
      for (int v = 0; v < n2; ++v)
        if (b.adj[u][v] > 0 && (!used[u] || !used[v])) pend2 += b.adj[u][v];
    return node_lb + std::abs(pend1[depth] - pend2);
  };

  auto step_cost = [&](const detail::AStarState& s, int j) {
    const int i = (int)s.assignment.size();
    double delta;
    if (j < 0) {
      delta = 1.0 + a.adj[i][i];
      for (int u = 0; u < i; ++u) delta += a.adj[u][i] + a.adj[i][u];
    } else {
      delta = detail::subst_cost(a, i, b, j) + std::abs(a.adj[i][i] - b.adj[j][j]);
      for (int u = 0; u < i; ++u) {
        const int au = s.assignment[u];
        if (au < 0)
          delta += a.adj[u][i] + a.adj[i][u];
        else
          delta += std::abs(a.adj[u][i] - b.adj[au][j]) + std::abs(a.adj[i][u] - b.adj[j][au]);
      }
    }
    return delta;
  };

  auto completion_cost = [&](const detail::AStarState& s) {
    std::vector<bool> used(n2, false);
    for (int x : s.assignment)
      if (x >= 0) used[x] = true;
    double extra = 0.0;
    for (int j = 0; j < n2; ++j)
      if (!used[j]) extra += 1.0;
    for (int u = 0; u < n2; ++u)
      for (int v = 0; v < n2; ++v)
        if (b.adj[u][v] > 0 && (!used[u] || !used[v])) extra += b.adj[u][v];
    return extra;
  };

  const auto t0 = std::chrono::steady_clock::now();
  auto over_time = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
               .count() > budget.max_millis;
  };

  // Priority queue keyed by f = g + h; ties broken by insertion order so runs
  // are reproducible.
  using Entry = std::tuple<double, long, size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  std::vector<detail::AStarState> pool;
  long seq = 0;

  pool.push_back({{}, 0.0});
  if (n1 == 0) pool[0].g = completion_cost(pool[0]);  // nothing to map, only inserts
  open.emplace(n1 == 0 ? pool[0].g : pool[0].g + heuristic(pool[0]), seq++, 0);

  bool exhausted = budget.max_states <= 0;
  while (!exhausted && !open.empty()) {
    auto [f, _, idx] = open.top();
    open.pop();
    const detail::AStarState state = pool[idx];
    const int depth = (int)state.assignment.size();

    if (depth == n1) {
      result.cost = state.g;
      result.exact = true;
      return result;
    }
    if (++result.expanded_states > budget.max_states ||
        (result.expanded_states % 256 == 0 && over_time())) {
      exhausted = true;
      break;
    }

    std::vector<bool> used(n2, false);
    for (int x : state.assignment)
      if (x >= 0) used[x] = true;
    for (int j = -1; j < n2; ++j) {
      if (j >= 0 && used[j]) continue;
      detail::AStarState next = state;
      next.assignment.push_back(j);
      next.g += step_cost(state, j);
      double h;
      if ((int)next.assignment.size() == n1) {
        next.g += completion_cost(next);
        h = 0.0;
      } else {
        h = heuristic(next);
      }
      pool.push_back(next);
      open.emplace(next.g + h, seq++, pool.size() - 1);
    }
  }

  result.cost = detail::bipartite_upper_bound(a, b);
  result.exact = false;
  return result;
}

/// R-GED score from a precomputed edit distance:
/// 1 - GED(ref, gen) / (GED(ref, empty) + GED(gen, empty)); both-empty is a
/// perfect match by convention.
inline RGedScore r_ged_from_cost(double cost, const ProcessGraph& reference,
                                 const ProcessGraph& generated) {
  const double dref = (double)(reference.nodes.size() + reference.edges.size());
  const double dgen = (double)(generated.nodes.size() + generated.edges.size());
  RGedScore score;
  if (dref + dgen == 0.0) {
    score.value = 1.0;
  } else {
    score.value = std::clamp(1.0 - cost / (dref + dgen), 0.0, 1.0);
  }
  score.percent = 100.0 * score.value;
  return score;
}

inline RGedScore r_ged(const ProcessGraph& reference, const ProcessGraph& generated,
                       const GedBudget& budget = {}) {
  return r_ged_from_cost(ged(reference, generated, budget).cost, reference, generated);
}

}  // namespace bpmeval
