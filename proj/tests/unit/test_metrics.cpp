// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>
#include <vector>

#include "cirnn/error.hpp"
#include "cirnn/metrics.hpp"
#include "doctest.h"

using namespace cirnn;

namespace {
double score1(double pred, double truth, const ScoreConstants& c = {}) {
  const std::vector<double> p{pred}, t{truth};
  return score(p, t, c);
}
}  // namespace

TEST_CASE("rmse") {
  const std::vector<double> p{3, -4}, t{0, 0};
  CHECK(rmse(p, t) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(rmse(t, t) == 0.0);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), MetricError);
  CHECK_THROWS_AS(rmse(std::vector<double>{1}, std::vector<double>{1, 2}), MetricError);
}

TEST_CASE("asymmetric score") {
  CHECK(score1(50, 50) == 0.0);
  CHECK(std::abs(score1(63, 50) - (std::exp(1.0) - 1.0)) < 1e-9);  // late by 13
  CHECK(std::abs(score1(40, 50) - (std::exp(1.0) - 1.0)) < 1e-9);  // early by 10
  // Early errors cost more than late ones of equal size by default.
  CHECK(score1(40, 50) > score1(60, 50));
  const ScoreConstants phm = ScoreConstants::phm08();
  CHECK(score1(40, 50, phm) < score1(60, 50, phm));
  CHECK(std::abs(score1(60, 50, phm) - (std::exp(1.0) - 1.0)) < 1e-9);

  double prev = 0.0;
  for (double d = 1.0; d <= 40.0; d += 1.0) {
    const double late = score1(50 + d, 50), early = score1(50 - d, 50);
    CHECK(late > prev);
    CHECK(early > late);
    prev = late;
  }
  const std::vector<double> p{40, 63}, t{50, 50};
  CHECK(score(p, t) == doctest::Approx(2 * (std::exp(1.0) - 1.0)));
}

TEST_CASE("per-unit aggregation") {
  const std::vector<UnitPredictions> units{
      {1, {3, 3}, {0, 0}},
      {2, {5}, {0}},
      {3, {}, {}},
  };
  const EvalReport r = evaluate_per_unit(units);
  REQUIRE(r.n_units() == 2);
  CHECK(r.units[0].rmse == 3.0);
  CHECK(r.units[1].rmse == 5.0);
  CHECK(r.units[0].n == 2);
  CHECK(r.rmse_mean == 4.0);
  CHECK(r.rmse_std == 1.0);
  CHECK(r.warnings.size() == 1);

  const double s1 = r.units[0].score, s2 = r.units[1].score;
  CHECK(s1 == doctest::Approx(2 * (std::exp(3.0 / 13.0) - 1.0)));
  CHECK(r.score_mean == doctest::Approx((s1 + s2) / 2));
  CHECK(r.score_std == doctest::Approx(std::abs(s1 - s2) / 2));

  const std::vector<UnitPredictions> perfect{{7, {10, 20}, {10, 20}}};
  const EvalReport zero = evaluate_per_unit(perfect);
  CHECK(zero.rmse_mean == 0.0);
  CHECK(zero.score_mean == 0.0);
}

TEST_CASE("report formats") {
  const std::vector<UnitPredictions> units{{1, {3, 3}, {0, 0}}, {2, {5}, {0}}};
  const EvalReport r = evaluate_per_unit(units);
  std::ostringstream report;
  write_report_csv(report, r);
  std::istringstream lines(report.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "unit,n,rmse,score");
  CHECK(first.rfind("1,2,3,", 0) == 0);

  std::ostringstream summary;
  write_summary_csv(summary, "CiRNN_D2", r);
  CHECK(summary.str().rfind("model,n_units,rmse_mean,rmse_std,score_mean,score_std\nCiRNN_D2,2,4,1,", 0) == 0);

  EvalReport fixed;
  fixed.rmse_mean = 11.971;
  fixed.rmse_std = 4.9449;
  fixed.score_mean = 363.0349;
  fixed.score_std = 710.7;
  CHECK(summary_line("CiRNN_D2", fixed) ==
        "CiRNN_D2  RMSE (mean, std) = 11.97, 4.94  Score (s) (mean, std) = 363.03, 710.70");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
