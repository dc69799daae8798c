// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_STATS_HPP
#define REVSUM_STATS_HPP

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace revsum::stats {

// Special functions. Series for x < a + 1, Lentz continued fraction otherwise.

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double df);
/// P(|T| >= |t|) for Student's t.
double student_t_two_tailed(double t, double df);

/// Critical values by bisection on the tail functions above.
double chi_square_critical(double alpha, double df);
double student_t_critical(double alpha_two_tailed, double df);

struct StatResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

struct PairedTResult : StatResult {
  double mean_difference = 0.0;
  std::size_t n = 0;
};

struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  std::vector<std::vector<std::int64_t>> counts;  // rows x columns

  /// At least 2x2, rectangular, non-negative.
  void validate() const;

  /// Header row "<corner>,<level>,...", then "<row label>,<count>,..." per row.
  static ContingencyTable read_csv(std::istream& in);
};

/// Pearson's test of independence; df = (rows - 1)(cols - 1). Throws on a
/// zero row or column total.
StatResult chi_square(const ContingencyTable& table);

/// Two-tailed paired t-test on a - b. Throws on a length mismatch, fewer than
/// two pairs, or zero variance of the differences.
PairedTResult paired_t(std::span<const double> a, std::span<const double> b);

}  // namespace revsum::stats

#endif  // REVSUM_STATS_HPP
