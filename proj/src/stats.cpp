// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "csv.hpp"
#include "revsum/error.hpp"

namespace revsum::stats {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz method.
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw Error(Errc::numeric, fmt::format("incomplete gamma needs a > 0 and x >= 0 (got a={}, x={})", a, x));
  }
}

template <typename TailFn>
double bisect_upper(double alpha, TailFn tail, double hi) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::numeric, "alpha must lie in (0, 1)");
  double lo = 0.0;
  while (tail(hi) > alpha) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tail(mid) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_continued_fraction(a, x);
}

double beta_inc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(Errc::numeric, fmt::format("incomplete beta needs a, b > 0 and 0 <= x <= 1 (got {}, {}, {})", a, b, x));
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double chi_square_sf(double x, double df) {
  if (!(df > 0.0)) throw Error(Errc::numeric, "chi-square needs df > 0");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw Error(Errc::numeric, "Student's t needs df > 0");
  if (t == 0.0) return 1.0;
  return beta_inc(0.5 * df, 0.5, df / (df + t * t));
}

double chi_square_critical(double alpha, double df) {
  return bisect_upper(alpha, [df](double x) { return chi_square_sf(x, df); }, std::max(1.0, 2.0 * df));
}

double student_t_critical(double alpha_two_tailed, double df) {
  return bisect_upper(alpha_two_tailed, [df](double t) { return student_t_two_tailed(t, df); }, 10.0);
}

void ContingencyTable::validate() const {
  if (counts.size() < 2) throw Error(Errc::invalid_argument, "contingency table needs at least 2 rows");
  const auto cols = counts.front().size();
  if (cols < 2) throw Error(Errc::invalid_argument, "contingency table needs at least 2 columns");
  for (const auto& row : counts) {
    if (row.size() != cols) throw Error(Errc::invalid_argument, "contingency table rows differ in length");
    for (auto v : row) {
      if (v < 0) throw Error(Errc::invalid_argument, "contingency counts must be non-negative");
    }
  }
  if (!row_labels.empty() && row_labels.size() != counts.size()) {
    throw Error(Errc::invalid_argument, "row label count does not match the table");
  }
  if (!column_labels.empty() && column_labels.size() != cols) {
    throw Error(Errc::invalid_argument, "column label count does not match the table");
  }
}

ContingencyTable ContingencyTable::read_csv(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.size() < 3) throw Error(Errc::parse, "contingency CSV needs a header and at least 2 rows");
  ContingencyTable t;
  t.column_labels.assign(rows[0].begin() + 1, rows[0].end());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != rows[0].size()) throw Error(Errc::parse, fmt::format("contingency CSV row {} has {} fields", i + 1, r.size()));
    t.row_labels.push_back(r[0]);
    std::vector<std::int64_t> counts;
    for (std::size_t k = 1; k < r.size(); ++k) {
      try {
        std::size_t used = 0;
        counts.push_back(std::stoll(r[k], &used));
        if (used != r[k].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(Errc::parse, fmt::format("contingency CSV row {}: '{}' is not an integer", i + 1, r[k]));
      }
    }
    t.counts.push_back(std::move(counts));
  }
  t.validate();
  return t;
}

StatResult chi_square(const ContingencyTable& table) {
  table.validate();
  const auto rows = table.counts.size();
  const auto cols = table.counts.front().size();
  std::vector<double> row_total(rows, 0.0);
  std::vector<double> col_total(cols, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const auto v = static_cast<double>(table.counts[i][j]);
      row_total[i] += v;
      col_total[j] += v;
      grand += v;
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (row_total[i] == 0.0) throw Error(Errc::invalid_argument, fmt::format("row {} of the contingency table sums to zero", i + 1));
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (col_total[j] == 0.0) throw Error(Errc::invalid_argument, fmt::format("column {} of the contingency table sums to zero", j + 1));
  }

  double statistic = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double expected = row_total[i] * col_total[j] / grand;
      const double diff = static_cast<double>(table.counts[i][j]) - expected;
      statistic += diff * diff / expected;
    }
  }
  StatResult r;
  r.statistic = statistic;
  r.df = static_cast<double>((rows - 1) * (cols - 1));
  r.p_value = std::clamp(chi_square_sf(statistic, r.df), 0.0, 1.0);
  return r;
}

PairedTResult paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::invalid_argument, fmt::format("paired t-test on lists of length {} and {}", a.size(), b.size()));
  const std::size_t n = a.size();
  if (n < 2) throw Error(Errc::invalid_argument, "paired t-test needs at least 2 pairs");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n - 1);
  PairedTResult r;
  r.n = n;
  r.mean_difference = mean;
  r.df = static_cast<double>(n - 1);
  if (var == 0.0) {
    if (mean == 0.0) {
      r.statistic = 0.0;  // identical lists
      r.p_value = 1.0;
      return r;
    }
    throw Error(Errc::numeric, "paired t-test: differences have zero variance");
  }
  r.statistic = mean / std::sqrt(var / static_cast<double>(n));
  r.p_value = std::clamp(student_t_two_tailed(r.statistic, r.df), 0.0, 1.0);
  return r;
}

}  // namespace revsum::stats
