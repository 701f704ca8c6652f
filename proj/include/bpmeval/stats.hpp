#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bpmeval/errors.hpp"

namespace bpmeval {

struct Interval {
  double point = 0.0;
  double low = 0.0;
  double high = 0.0;
  double confidence = 0.95;
  // Percentile bootstrap can miss its own point estimate under extreme skew.
  bool point_contained = true;
};

struct FriedmanResult {
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  double w = 0.0;  // Kendall's coefficient of concordance
  int n_blocks = 0;
  int k_treatments = 0;
};

/// Inverse standard normal CDF. Acklam's rational approximation plus one
/// Halley refinement step; absolute error well under 1.2e-8.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidCounts("normal_quantile requires 0 < p < 1");

  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425, p_high = 1.0 - p_low;

  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= p_high) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

namespace detail {

// Regularized lower incomplete gamma P(a, x) by series expansion.
inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by continued fraction (Lentz).
inline double gamma_q_continued_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -(double)i * ((double)i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Upper-tail probability of the chi-square distribution.
inline double chi_square_sf(double x, int df) {
  if (df < 1) throw InvalidCounts("chi_square_sf requires df >= 1");
  if (x < 0.0) throw InvalidCounts("chi_square_sf requires x >= 0");
  if (x == 0.0) return 1.0;
  const double a = df / 2.0, half_x = x / 2.0;
  if (half_x < a + 1.0) return 1.0 - detail::gamma_p_series(a, half_x);
  return detail::gamma_q_continued_fraction(a, half_x);
}

/// Wilson score interval for a binomial proportion, no continuity correction.
inline Interval wilson_interval(long successes, long trials, double confidence = 0.95) {
  if (trials <= 0) throw InvalidCounts("wilson_interval requires trials > 0");
  if (successes < 0 || successes > trials)
    throw InvalidCounts("wilson_interval requires 0 <= successes <= trials");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw InvalidCounts("wilson_interval requires confidence in (0, 1)");

  const double z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
  const double n = (double)trials;
  const double p = (double)successes / n;
  const double q = z * z;
  const double denom = 1.0 + q / n;
  const double center = (p + q / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + q / (4.0 * n * n)) / denom;

  Interval out;
  out.point = p;
  out.confidence = confidence;
  out.low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  out.high = successes == trials ? 1.0 : std::min(1.0, center + half);
  return out;
}

namespace detail {

inline uint64_t bounded_draw(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace detail

/// Percentile bootstrap of the mean. Endpoints are order statistics of the
/// resample means; fully deterministic for a fixed seed.
inline Interval bootstrap_ci(const std::vector<double>& values, int resamples,
                             double confidence, uint64_t seed) {
  if (values.empty()) throw EmptyInput("bootstrap_ci requires non-empty values");
  if (resamples < 1) throw EmptyInput("bootstrap_ci requires resamples >= 1");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw InvalidCounts("bootstrap_ci requires confidence in (0, 1)");

  const size_t n = values.size();
  double total = 0.0;
  for (double v : values) total += v;

  std::mt19937_64 rng(seed);
  std::vector<double> means((size_t)resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += values[detail::bounded_draw(rng, n)];
    m = s / (double)n;
  }
  std::sort(means.begin(), means.end());

  const double alpha = 1.0 - confidence;
  const size_t count = means.size();
  size_t lo = (size_t)std::floor(alpha / 2.0 * (double)count);
  size_t hi = (size_t)std::ceil((1.0 - alpha / 2.0) * (double)count);
  if (lo >= count) lo = count - 1;
  hi = hi == 0 ? 0 : hi - 1;
  if (hi >= count) hi = count - 1;
  if (hi < lo) hi = lo;

  Interval out;
  out.point = total / (double)n;
  out.low = means[lo];
  out.high = means[hi];
  out.confidence = confidence;
  out.point_contained = out.low <= out.point && out.point <= out.high;
  return out;
}

/// Kendall's W from a Friedman chi-square statistic.
inline double kendalls_w(double chi2, int n_blocks, int k_treatments) {
  const double denom = (double)n_blocks * (double)(k_treatments - 1);
  return denom > 0.0 ? chi2 / denom : 0.0;
}

/// Friedman rank test over n blocks x k treatments with mid-rank ties and the
/// standard tie correction. All-tied input yields chi2 = 0, W = 0.
inline FriedmanResult friedman_test(const std::vector<std::vector<double>>& scores) {
  const size_t n = scores.size();
  if (n < 2) throw ShapeError("friedman_test requires at least 2 blocks");
  const size_t k = scores[0].size();
  if (k < 2) throw ShapeError("friedman_test requires at least 2 treatments");
  for (const auto& row : scores)
    if (row.size() != k) throw ShapeError("friedman_test requires a rectangular matrix");

  std::vector<double> rank_sums(k, 0.0);
  double tie_term = 0.0;  // sum over blocks of sum(t^3 - t)
  std::vector<size_t> order(k);
  for (const auto& row : scores) {
    for (size_t j = 0; j < k; ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return row[a] < row[b]; });
    size_t i = 0;
    while (i < k) {
      size_t j = i;
      while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
      const double mid_rank = (double)(i + j + 2) / 2.0;  // ranks are 1-based
      for (size_t t = i; t <= j; ++t) rank_sums[order[t]] += mid_rank;
      const double ties = (double)(j - i + 1);
      tie_term += ties * ties * ties - ties;
      i = j + 1;
    }
  }

  const double dn = (double)n, dk = (double)k;
  double sum_sq = 0.0;
  for (double rj : rank_sums) sum_sq += rj * rj;
  const double uncorrected = 12.0 / (dn * dk * (dk + 1.0)) * sum_sq - 3.0 * dn * (dk + 1.0);
  const double correction = 1.0 - tie_term / (dn * dk * (dk * dk - 1.0));

  FriedmanResult out;
  out.n_blocks = (int)n;
  out.k_treatments = (int)k;
  out.df = (int)k - 1;
  out.chi2 = correction > 0.0 ? std::max(0.0, uncorrected / correction) : 0.0;
  out.p_value = chi_square_sf(out.chi2, out.df);
  out.w = kendalls_w(out.chi2, out.n_blocks, out.k_treatments);
  return out;
}

}  // namespace bpmeval
