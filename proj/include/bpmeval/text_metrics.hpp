#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bpmeval/errors.hpp"

namespace bpmeval {

using TokenSequence = std::vector<std::string>;

/// Lowercases and splits on whitespace; each of { } ; = " [ ] and the arrow
/// "->" becomes its own token.
inline TokenSequence tokenize(const std::string& text) {
  TokenSequence tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      tokens.push_back(word);
      word.clear();
    }
  };
  for (size_t i = 0; i < text.size(); ++i) {
    unsigned char c = text[i];
    if (std::isspace(c)) {
      flush();
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      flush();
      tokens.push_back("->");
      ++i;
      continue;
    }
    if (c == '{' || c == '}' || c == ';' || c == '=' || c == '"' || c == '[' || c == ']') {
      flush();
      tokens.push_back(std::string(1, (char)c));
      continue;
    }
    word += (char)std::tolower(c);
  }
  flush();
  return tokens;
}

struct TextScores {
  double bleu = 0.0;
  double rouge_l = 0.0;
  double meteor = 0.0;
};

namespace detail {

constexpr double kBleuEpsilon = 1e-9;

inline std::map<std::vector<std::string>, int> ngram_counts(const TokenSequence& seq, int n) {
  std::map<std::vector<std::string>, int> counts;
  if ((int)seq.size() < n) return counts;
  for (size_t i = 0; i + n <= seq.size(); ++i)
    counts[std::vector<std::string>(seq.begin() + i, seq.begin() + i + n)]++;
  return counts;
}

inline int lcs_length(const TokenSequence& a, const TokenSequence& b) {
  std::vector<int> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

/// Sentence-level BLEU-4 with uniform weights, clipped precisions, brevity
/// penalty exp(1 - r/c) for short candidates, and epsilon smoothing of
/// zero-count precisions. Scaled to [0, 100].
inline double bleu(const TokenSequence& candidate, const TokenSequence& reference) {
  if (reference.empty()) throw EmptyReference();
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    auto cand_counts = detail::ngram_counts(candidate, n);
    auto ref_counts = detail::ngram_counts(reference, n);
    long total = 0, clipped = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    double p = (total == 0 || clipped == 0) ? detail::kBleuEpsilon
                                            : (double)clipped / (double)total;
    log_sum += 0.25 * std::log(p);
  }
  const double c = (double)candidate.size();
  const double r = (double)reference.size();
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * bp * std::exp(log_sum);
}

/// ROUGE-L: F1 over the longest common subsequence, scaled to [0, 100].
inline double rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  if (reference.empty()) throw EmptyReference();
  if (candidate.empty()) return 0.0;
  const double lcs = detail::lcs_length(candidate, reference);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / (double)candidate.size();
  const double r = lcs / (double)reference.size();
  return 100.0 * 2.0 * p * r / (p + r);
}

namespace detail {

struct MeteorAlignment {
  int matches = 0;
  int chunks = 0;
};

// Exact-match alignment built greedily from the longest common fragments
// (ties to the leftmost candidate, then leftmost reference position). Always
// attains the maximum match count; fragment count is the chunk count.
inline MeteorAlignment align_for_meteor(const TokenSequence& cand, const TokenSequence& ref) {
  const size_t nc = cand.size(), nr = ref.size();
  std::vector<bool> used_c(nc, false), used_r(nr, false);
  std::vector<std::pair<int, int>> pairs;

  for (;;) {
    int best_len = 0;
    size_t best_c = 0, best_r = 0;
    for (size_t i = 0; i < nc; ++i) {
      if (used_c[i]) continue;
      if ((int)(nc - i) <= best_len) break;  // no later start can beat the best
      for (size_t j = 0; j < nr; ++j) {
        if (used_r[j] || cand[i] != ref[j]) continue;
        if ((int)std::min(nc - i, nr - j) <= best_len) continue;
        int len = 0;
        while (i + len < nc && j + len < nr && !used_c[i + len] && !used_r[j + len] &&
               cand[i + len] == ref[j + len])
          ++len;
        if (len > best_len) {
          best_len = len;
          best_c = i;
          best_r = j;
        }
      }
    }
    if (best_len == 0) break;
    for (int k = 0; k < best_len; ++k) {
      used_c[best_c + k] = true;
      used_r[best_r + k] = true;
      pairs.emplace_back((int)(best_c + k), (int)(best_r + k));
    }
  }

  MeteorAlignment out;
  out.matches = (int)pairs.size();
  std::sort(pairs.begin(), pairs.end());
  for (size_t k = 0; k < pairs.size(); ++k) {
    if (k == 0 || pairs[k].first != pairs[k - 1].first + 1 ||
        pairs[k].second != pairs[k - 1].second + 1)
      ++out.chunks;
  }
  return out;
}

}  // namespace detail

/// METEOR with exact unigram matching and the original parameters:
/// F_mean = 10PR/(R + 9P), penalty = 0.5 * (chunks/matches)^3.
/// Scaled to [0, 100]; 0 when nothing matches.
inline double meteor(const TokenSequence& candidate, const TokenSequence& reference) {
  if (reference.empty()) throw EmptyReference();
  if (candidate.empty()) return 0.0;
  const auto alignment = detail::align_for_meteor(candidate, reference);
  if (alignment.matches == 0) return 0.0;
  const double m = alignment.matches;
  const double p = m / (double)candidate.size();
  const double r = m / (double)reference.size();
  const double f_mean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = (double)alignment.chunks / m;
  const double penalty = 0.5 * frag * frag * frag;
  return 100.0 * f_mean * (1.0 - penalty);
}

inline TextScores score_text(const TokenSequence& candidate, const TokenSequence& reference) {
  return {bleu(candidate, reference), rouge_l(candidate, reference),
          meteor(candidate, reference)};
}

}  // namespace bpmeval
