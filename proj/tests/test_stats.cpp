// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "revsum/error.hpp"
#include "revsum/stats.hpp"
#include "support.hpp"

using namespace revsum;
using namespace revsum::stats;

namespace {

ContingencyTable table(std::vector<std::vector<std::int64_t>> counts) {
  ContingencyTable t;
  for (std::size_t i = 0; i < counts.size(); ++i) t.row_labels.push_back("r" + std::to_string(i));
  for (std::size_t j = 0; j < counts.at(0).size(); ++j) t.column_labels.push_back("c" + std::to_string(j));
  t.counts = std::move(counts);
  return t;
}

double boost_chi2_sf(double x, double df) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), x));
}

double boost_t_two(double t, double df) {
  return 2 * boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(df), std::abs(t)));
}

}  // namespace

TEST_CASE("readability study contingency table") {
  std::ifstream in(testing::data_dir() / "fixtures" / "readability_study.csv");
  const auto t = ContingencyTable::read_csv(in);
  CHECK(t.row_labels == std::vector<std::string>{"3rd", "4th", "5th"});
  CHECK(t.column_labels.size() == 4);
  const auto r = chi_square(t);
  CHECK(r.statistic == doctest::Approx(5.801298701).epsilon(1e-9));
  CHECK(r.df == 6);
  CHECK(r.p_value == doctest::Approx(0.445813).epsilon(1e-5));
  CHECK(r.p_value > 0.44);
  CHECK(r.p_value < 0.45);
}

TEST_CASE("perfectly associated 2x2 table") {
  const auto r = chi_square(table({{10, 0}, {0, 10}}));
  CHECK(r.statistic == doctest::Approx(20.0));
  CHECK(r.df == 1);
  CHECK(r.p_value == doctest::Approx(7.744e-06).epsilon(1e-3));
}

TEST_CASE("identical rows give statistic 0 and p 1") {
  const auto r = chi_square(table({{3, 5, 7}, {3, 5, 7}, {6, 10, 14}}));
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("chi-square matches a direct computation on random tables") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t rows = 2 + rng() % 4, cols = 2 + rng() % 4;
    std::vector<std::vector<std::int64_t>> c(rows, std::vector<std::int64_t>(cols));
    for (auto& row : c) {
      for (auto& v : row) v = 1 + static_cast<std::int64_t>(rng() % 30);
    }
    double n = 0;
    std::vector<double> rs(rows, 0), cs(cols, 0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        rs[i] += c[i][j];
        cs[j] += c[i][j];
        n += c[i][j];
      }
    }
    double stat = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double e = rs[i] * cs[j] / n;
        stat += (c[i][j] - e) * (c[i][j] - e) / e;
      }
    }
    const double df = static_cast<double>((rows - 1) * (cols - 1));
    const auto r = chi_square(table(c));
    CHECK(r.statistic == doctest::Approx(stat).epsilon(1e-10));
    CHECK(r.df == df);
    CHECK(std::abs(r.p_value - boost_chi2_sf(stat, df)) < 1e-10);
  }
}

TEST_CASE("contingency validation") {
  CHECK_THROWS_AS(chi_square(table({{1, 2, 3}})), Error);
  CHECK_THROWS_AS(chi_square(table({{1}, {2}})), Error);
  CHECK_THROWS_AS(chi_square(table({{1, -2}, {3, 4}})), Error);
  CHECK_THROWS_AS(chi_square(table({{0, 0}, {3, 4}})), Error);
  CHECK_THROWS_AS(chi_square(table({{0, 1}, {0, 4}})), Error);
  std::istringstream bad("x,a,b\nr1,1,two\nr2,3,4\n");
  CHECK_THROWS_AS(ContingencyTable::read_csv(bad), Error);
}

TEST_CASE("incomplete gamma against closed forms and boost") {
  // Q(a, x) for integer a is a truncated Poisson sum.
  for (int a = 1; a <= 6; ++a) {
    for (double x : {0.1, 0.5, 1.0, 2.5, 7.0, 15.0, 40.0}) {
      double term = 1.0, sum = 1.0;
      for (int k = 1; k < a; ++k) {
        term *= x / k;
        sum += term;
      }
      CHECK(gamma_q(a, x) == doctest::Approx(std::exp(-x) * sum).epsilon(1e-12));
      CHECK(gamma_p(a, x) + gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  for (double df : {0.5, 1.0, 3.0, 6.0, 17.5, 60.0}) {
    for (double x : {0.01, 0.3, 1.0, 5.0, 12.592, 30.0, 120.0}) {
      CHECK(std::abs(chi_square_sf(x, df) - boost_chi2_sf(x, df)) < 1e-12);
    }
  }
  CHECK(chi_square_sf(0.0, 3) == 1.0);
  CHECK_THROWS_AS(gamma_p(0.0, 1.0), Error);
}

TEST_CASE("Student's t against closed forms and boost") {
  for (double t : {0.0, 0.3, 1.0, 2.365, 7.0, -3.5}) {
    CHECK(student_t_two_tailed(t, 1) == doctest::Approx(1 - 2 / std::numbers::pi * std::atan(std::abs(t))));
    CHECK(student_t_two_tailed(t, 2) == doctest::Approx(1 - std::abs(t) / std::sqrt(2 + t * t)));
    for (double df : {3.0, 7.0, 12.5, 40.0}) {
      CHECK(std::abs(student_t_two_tailed(t, df) - boost_t_two(t, df)) < 1e-12);
    }
  }
  CHECK(beta_inc(2, 3, 0) == 0.0);
  CHECK(beta_inc(2, 3, 1) == 1.0);
  // I_x(a, b) = 1 - I_{1-x}(b, a)
  CHECK(beta_inc(2.5, 4, 0.3) == doctest::Approx(1 - beta_inc(4, 2.5, 0.7)).epsilon(1e-13));
}

TEST_CASE("published quantiles") {
  CHECK(chi_square_sf(12.592, 6) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(std::abs(chi_square_critical(0.05, 6) - 12.592) < 1e-3);
  CHECK(std::abs(student_t_two_tailed(2.365, 7) - 0.05) < 1e-3);
  CHECK(std::abs(student_t_critical(0.05, 7) - 2.365) < 1e-3);
  CHECK(std::abs(chi_square_critical(0.01, 1) - 6.635) < 1e-3);
  CHECK(std::abs(student_t_critical(0.01, 30) - 2.750) < 1e-3);
}

TEST_CASE("paired t on the published entity counts") {
  const std::vector<double> cod5{15, 14, 8, 13, 2, 6, 8, 7}, codr5{15, 11, 13, 12, 14, 11, 8, 10};
  const auto r = paired_t(codr5, cod5);
  CHECK(r.mean_difference == doctest::Approx(2.625).epsilon(1e-12));
  CHECK(r.statistic == doctest::Approx(1.5633875).epsilon(1e-7));
  CHECK(r.df == 7);
  CHECK(r.n == 8);
  CHECK(r.p_value == doctest::Approx(0.1619363).epsilon(1e-6));
}

TEST_CASE("paired t properties") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(3 + rng() % 10), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    const auto ab = paired_t(a, b), ba = paired_t(b, a);
    CHECK(ab.statistic == doctest::Approx(-ba.statistic));
    CHECK(ab.p_value == doctest::Approx(ba.p_value));
    CHECK(ab.p_value >= 0.0);
    CHECK(ab.p_value <= 1.0);
  }
  const std::vector<double> same{1, 2, 3};
  const auto z = paired_t(same, same);
  CHECK(z.statistic == 0.0);
  CHECK(z.p_value == 1.0);
  const std::vector<double> shifted{2, 3, 4};
  CHECK_THROWS_AS(paired_t(shifted, same), Error);
  const std::vector<double> one{1};
  CHECK_THROWS_AS(paired_t(one, one), Error);
  CHECK_THROWS_AS(paired_t(same, one), Error);
}
