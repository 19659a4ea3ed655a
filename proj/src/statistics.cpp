#include <cmath>
#include <cstdio>
#include <limits>

#include "chunkbench/error.hpp"
#include "chunkbench/evaluation.hpp"

namespace chunkbench::evaluation {

FoldAssignment kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1) {
    throw ConfigError("kfold_split: k must be >= 1");
  }
  if (k > n) {
    throw ConfigError("kfold_split: k (" + std::to_string(k) + ") exceeds item count (" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = i;
  }
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.next() % (i + 1));
    std::swap(order[i], order[j]);
  }
  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.folds.resize(k);
  for (std::size_t i = 0; i < n; ++i) {
    out.folds[i % k].push_back(order[i]);
  }
  return out;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) {
    throw Error("aggregate: empty value list");
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  Aggregate agg;
  agg.mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) {
    agg.singleton = true;
    return agg;
  }
  double ss = 0.0;
  for (double v : values) {
    ss += (v - agg.mean) * (v - agg.mean);
  }
  agg.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return agg;
}

std::string format_mean_std(const Aggregate& agg) {
  char buf[96];
  // Avoid "-0.0000".
  const double mean = agg.mean == 0.0 ? 0.0 : agg.mean;
  std::snprintf(buf, sizeof buf, "%.4f ± %.4f", mean, agg.std);
  std::string out = buf;
  if (out.rfind("-0.0000 ", 0) == 0) {
    out.erase(0, 1);
  }
  return out;
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) {
    d = kTiny;
  }
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) {
      d = kTiny;
    }
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) {
      c = kTiny;
    }
    d = 1.0 / d;
    h *= d * c;

    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) {
      d = kTiny;
    }
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) {
      c = kTiny;
    }
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) {
      return h;
    }
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error("regularized_incomplete_beta: a and b must be positive");
  }
  if (x <= 0.0) {
    return 0.0;
  }
  if (x >= 1.0) {
    return 1.0;
  }
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double t_tail_probability(double t, double df) {
  if (!(df >= 1.0)) {
    throw ConfigError("t_tail_probability: df must be >= 1");
  }
  if (std::isinf(t)) {
    return 0.0;
  }
  if (t == 0.0) {
    return 1.0;
  }
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(x, df / 2.0, 0.5), 0.0, 1.0);
}

std::string_view pairing_id(Pairing pairing) {
  return pairing == Pairing::PerFold ? "per_fold" : "per_question";
}

std::optional<Pairing> parse_pairing(std::string_view id) {
  if (id == "per_question") {
    return Pairing::PerQuestion;
  }
  if (id == "per_fold") {
    return Pairing::PerFold;
  }
  return std::nullopt;
}

TTestStats paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("paired_t_test: length mismatch (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                ")");
  }
  if (a.size() < 2) {
    throw Error("paired_t_test: need at least 2 pairs");
  }
  const std::size_t n = a.size();
  std::vector<double> diffs(n);
  for (std::size_t i = 0; i < n; ++i) {
    diffs[i] = a[i] - b[i];
  }
  const Aggregate agg = aggregate(diffs);

  TTestStats out;
  out.df = n - 1;
  if (agg.std == 0.0) {
    if (agg.mean == 0.0) {
      out.t = 0.0;
      out.p = 1.0;
    } else {
      out.t = std::copysign(std::numeric_limits<double>::infinity(), agg.mean);
      out.p = 0.0;
      out.degenerate = true;
    }
    return out;
  }
  out.t = agg.mean / (agg.std / std::sqrt(static_cast<double>(n)));
  out.p = t_tail_probability(out.t, static_cast<double>(out.df));
  return out;
}

}  // namespace chunkbench::evaluation
