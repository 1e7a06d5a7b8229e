#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dlab/econometrics.hpp"
#include "oracles.hpp"

using namespace dlab;
using testing::close_relative;

namespace {

std::vector<DesignColumn> plain_columns(Eigen::Index p, bool intercept) {
  std::vector<DesignColumn> cols;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (intercept && j == 0) {
      cols.push_back({"(intercept)", ColumnKind::kIntercept, 0});
    } else {
      cols.push_back({"x" + std::to_string(j), ColumnKind::kContinuous, 0});
    }
  }
  return cols;
}

// Random cohort with a planted linear dependence on ln k and year shifts.
std::vector<CohortRow> random_rows(std::uint64_t seed, std::size_t n, std::vector<Year> years, double b_k = -0.02) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> k(1, 10);
  std::uniform_int_distribution<std::uint64_t> r(5, 50), c(10, 1000);
  std::uniform_int_distribution<std::size_t> yr(0, years.size() - 1);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<CohortRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    CohortRow row;
    row.paper_id = i + 1;
    row.year = years[yr(rng)];
    row.team_size = k(rng);
    row.reference_length = r(rng);
    row.citations = c(rng);
    row.d_value = b_k * std::log(row.team_size) + 0.01 * std::log(row.citations) +
                  0.002 * static_cast<double>(row.year - years.front()) + noise(rng);
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> labels(const std::vector<DesignColumn>& cols) {
  std::vector<std::string> out;
  for (const auto& c : cols) out.push_back(c.label);
  return out;
}

}  // namespace

TEST_CASE("single-year EQ1 design has no year dummies") {
  auto rows = random_rows(1, 50, {2010});
  auto d = build_design(rows, ModelSpec{ModelVariant::kEq1});
  CHECK(labels(d.columns) == std::vector<std::string>{"(intercept)", "ln_k", "ln_r", "ln_c"});
  CHECK(d.dropped.empty());
  CHECK(d.x.rows() == 50);
  CHECK(d.x(3, 1) == std::log(static_cast<double>(rows[3].team_size)));
  CHECK(d.y[3] == rows[3].d_value);
}

TEST_CASE("two-year pooled EQ1 design adds one year dummy") {
  auto rows = random_rows(2, 60, {2015, 2017});
  auto d = build_design(rows, ModelSpec{ModelVariant::kEq1});
  REQUIRE(d.columns.size() == 5);
  CHECK(d.columns.back().label == "year=2017");
  CHECK(d.columns.back().kind == ColumnKind::kYearDummy);
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) CHECK(d.x(i, 4) == (rows[i].year == 2017 ? 1.0 : 0.0));
}

TEST_CASE("EQ2 design row for k=3, r=20, c=5") {
  std::vector<CohortRow> rows;
  for (std::uint32_t k = 1; k <= 4; ++k) rows.push_back({k, 2000, 0.1, k, 10 + k, 3 + k});
  rows.push_back({9, 2000, 0.0, 3, 20, 5});
  auto d = build_design(rows, ModelSpec{ModelVariant::kEq2});
  CHECK(labels(d.columns) ==
        std::vector<std::string>{"(intercept)", "ln_r", "ln_c", "ln_r_sq", "ln_c_sq", "k=2", "k=3", "k=4"});
  const Eigen::Index i = 4;
  CHECK(d.x(i, 5) == 0.0);
  CHECK(d.x(i, 6) == 1.0);
  CHECK(d.x(i, 7) == 0.0);
  CHECK(d.x(i, 1) == doctest::Approx(2.995732273553991).epsilon(1e-15));
  CHECK(d.x(i, 3) == doctest::Approx(2.995732273553991 * 2.995732273553991).epsilon(1e-15));
  CHECK(d.x(i, 4) == doctest::Approx(1.6094379124341003 * 1.6094379124341003).epsilon(1e-15));
}

TEST_CASE("constant non-intercept columns are dropped and reported") {
  auto rows = random_rows(3, 40, {2000});
  for (auto& r : rows) r.team_size = 1;
  auto d = build_design(rows, ModelSpec{ModelVariant::kEq1});
  CHECK(d.dropped == std::vector<std::string>{"ln_k"});
  CHECK(labels(d.columns) == std::vector<std::string>{"(intercept)", "ln_r", "ln_c"});
}

TEST_CASE("design rejects empty cohorts and zero counts") {
  CHECK_THROWS_AS(build_design(std::vector<CohortRow>{}, ModelSpec{}), ValidationError);
  std::vector<CohortRow> rows{{1, 2000, 0.0, 1, 0, 5}};
  CHECK_THROWS_AS(build_design(rows, ModelSpec{}), ValidationError);
}

TEST_CASE("exact line recovers its coefficients") {
  Eigen::MatrixXd x(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    y[i] = 2.0 + 3.0 * i;
  }
  auto fit = fit_ols(x, y, plain_columns(2, true));
  CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.coefficients[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("intercept-only model returns the mean") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 4.0, 9.0;
  auto fit = fit_ols(x, y, plain_columns(1, true));
  CHECK(fit.coefficients[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(fit.dof == 3);
}

TEST_CASE("random 200x5 problem matches the extended-precision oracle") {
  std::mt19937_64 rng(200);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(200, 5);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j < 5; ++j) x(i, j) = g(rng) * j + 0.5 * j;
    y[i] = 0.3 + x(i, 1) - 2.0 * x(i, 3) + g(rng);
  }
  auto fit = fit_ols(x, y, plain_columns(5, true));
  auto oracle = testing::wide_ols(x, y, 195);
  auto se = fit.standard_errors();
  for (int j = 0; j < 5; ++j) {
    CHECK(close_relative(fit.coefficients[j], oracle.beta[j], 1e-8));
    CHECK(close_relative(se[j], oracle.se[j], 1e-8));
  }
  CHECK(close_relative(fit.r_squared, oracle.r_squared, 1e-8));
}

TEST_CASE("rank deficiency names the dependent column") {
  Eigen::MatrixXd x(10, 3);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    x(i, 2) = 2.0 * i + 1.0;
    y[i] = i % 3;
  }
  try {
    fit_ols(x, y, plain_columns(3, true));
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    const std::string msg = e.what();
    CHECK((msg.find("x1") != std::string::npos || msg.find("x2") != std::string::npos));
  }
  Eigen::MatrixXd tiny = Eigen::MatrixXd::Ones(2, 2);
  tiny(1, 1) = 2.0;
  CHECK_THROWS_AS(fit_ols(tiny, Eigen::VectorXd::Ones(2), plain_columns(2, true)), ValidationError);
}

TEST_CASE("residuals are orthogonal and covariance is symmetric PSD") {
  auto rows = random_rows(9, 400, {2000, 2001, 2002});
  for (auto variant : {ModelVariant::kEq1, ModelVariant::kEq2}) {
    auto d = build_design(rows, ModelSpec{variant});
    for (auto cov : {CovarianceType::kClassical, CovarianceType::kHC1}) {
      auto fit = fit_ols(d, cov);
      const Eigen::VectorXd xte = d.x.transpose() * fit.residuals;
      for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
        const double scale = d.x.col(j).norm() * fit.residuals.norm() / static_cast<double>(d.x.rows());
        CHECK(std::abs(xte[j]) / static_cast<double>(d.x.rows()) <= 1e-8 * scale);
      }
      CHECK((fit.covariance - fit.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.covariance);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-14 * eig.eigenvalues().maxCoeff());
    }
  }
}

TEST_CASE("HC1 covariance matches a direct sandwich") {
  auto rows = random_rows(10, 300, {2000});
  auto d = build_design(rows, ModelSpec{});
  auto fit = fit_ols(d, CovarianceType::kHC1);
  const Eigen::MatrixXd bread = (d.x.transpose() * d.x).inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(d.x.cols(), d.x.cols());
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    meat += fit.residuals[i] * fit.residuals[i] * d.x.row(i).transpose() * d.x.row(i);
  }
  const double n = static_cast<double>(d.x.rows());
  const Eigen::MatrixXd expected = bread * meat * bread * (n / (n - static_cast<double>(d.x.cols())));
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) CHECK(close_relative(fit.covariance(j, j), expected(j, j), 1e-8));
}

TEST_CASE("scaling the response scales estimates and keeps t and p") {
  auto rows = random_rows(11, 300, {2000, 2001});
  auto d = build_design(rows, ModelSpec{});
  auto fit = fit_ols(d);
  auto scaled = d;
  scaled.y *= 7.5;
  auto fit2 = fit_ols(scaled);
  for (const auto& col : d.columns) {
    auto a = coefficient_test(fit, col.label);
    auto b = coefficient_test(fit2, col.label);
    CHECK(close_relative(b.estimate, 7.5 * a.estimate, 1e-10));
    CHECK(close_relative(b.std_error, 7.5 * a.std_error, 1e-10));
    CHECK(close_relative(b.t, a.t, 1e-10));
    CHECK(std::abs(b.p - a.p) <= 1e-10);
  }
}

TEST_CASE("row order does not change any reported number") {
  auto rows = random_rows(12, 300, {2000, 2001});
  auto shuffled = rows;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto a = fit_ols(build_design(rows, ModelSpec{ModelVariant::kEq2}));
  auto b = fit_ols(build_design(shuffled, ModelSpec{ModelVariant::kEq2}));
  REQUIRE(labels(a.columns) == labels(b.columns));
  for (Eigen::Index j = 0; j < a.coefficients.size(); ++j) {
    CHECK(std::abs(a.coefficients[j] - b.coefficients[j]) <= 1e-12);
    CHECK(std::abs(a.covariance(j, j) - b.covariance(j, j)) <= 1e-12);
  }
  CHECK(std::abs(a.r_squared - b.r_squared) <= 1e-12);
}

TEST_CASE("dummy fit and within fit agree on shared coefficients") {
  auto rows = random_rows(13, 500, {2015, 2017, 2019});
  auto d = build_design(rows, ModelSpec{ModelVariant::kEq1});
  auto dummy_fit = fit_ols(d);
  std::vector<Eigen::Index> keep;
  std::vector<DesignColumn> cols;
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
    if (d.columns[j].kind == ColumnKind::kContinuous) {
      keep.push_back(j);
      cols.push_back(d.columns[j]);
    }
  }
  Eigen::MatrixXd xs(d.x.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) xs.col(static_cast<Eigen::Index>(j)) = d.x.col(keep[j]);
  auto within = fit_within(xs, d.y, d.groups, cols);
  CHECK(within.dof == dummy_fit.dof);
  for (const auto& col : cols) {
    auto a = coefficient_test(dummy_fit, col.label);
    auto b = coefficient_test(within, col.label);
    CHECK(close_relative(b.estimate, a.estimate, 1e-8));
    CHECK(close_relative(b.std_error, a.std_error, 1e-8));
  }
}

TEST_CASE("t ratio and degenerate fits") {
  auto rows = random_rows(14, 100, {2000});
  auto fit = fit_ols(build_design(rows, ModelSpec{}));
  auto test = coefficient_test(fit, "ln_k");
  CHECK(test.t == test.estimate / test.std_error);
  CHECK(test.p > 0.0);
  CHECK(test.p < 1.0);
  CHECK_FALSE(test.degenerate);
  CHECK_THROWS_AS(coefficient_test(fit, "nope"), ValidationError);

  Eigen::MatrixXd x(6, 2);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    y[i] = 4.0 * i;
  }
  auto exact = fit_ols(x, y, plain_columns(2, true));
  exact.covariance.setZero();  // the exact-fit sigma^2 is only zero up to rounding
  auto slope = coefficient_test(exact, "x1");
  CHECK(slope.degenerate);
  CHECK(slope.p == 0.0);
  CHECK(std::isinf(slope.t));
  exact.coefficients[1] = 0.0;
  auto zero = coefficient_test(exact, "x1");
  CHECK(zero.degenerate);
  CHECK(zero.p == 1.0);
}

TEST_CASE("null rejection rate is calibrated") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  int rejections = 0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    Eigen::MatrixXd x(60, 3);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = g(rng);
      x(i, 2) = g(rng);
      y[i] = 1.0 + 0.5 * x(i, 2) + g(rng);
    }
    auto fit = fit_ols(x, y, plain_columns(3, true));
    if (coefficient_test(fit, "x1").p < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / reps;
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.07);
}

TEST_CASE("EQ1 curve equals x0'b by hand") {
  auto rows = random_rows(15, 300, {2000});
  auto fit = fit_ols(build_design(rows, ModelSpec{}));
  std::vector<std::uint32_t> grid{1, 4, 9};
  auto curve = effect_curve(fit, ModelSpec{}, grid);
  REQUIRE(curve.points.size() == 3);
  double mean_r = 0, mean_c = 0;
  for (const auto& r : rows) {
    mean_r += std::log(static_cast<double>(r.reference_length));
    mean_c += std::log(static_cast<double>(r.citations));
  }
  mean_r /= rows.size();
  mean_c /= rows.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double hand = fit.coefficients[0] + fit.coefficients[1] * std::log(grid[i]) + fit.coefficients[2] * mean_r +
                        fit.coefficients[3] * mean_c;
    CHECK(curve.points[i].effect == doctest::Approx(hand).epsilon(1e-12));
    CHECK(curve.points[i].lo95 < curve.points[i].effect);
    CHECK(curve.points[i].hi95 > curve.points[i].effect);
    CHECK(curve.points[i].hi95 - curve.points[i].effect == doctest::Approx(curve.points[i].band));
  }
}

TEST_CASE("EQ1 curve with zero slope is flat at the mean prediction") {
  auto rows = random_rows(16, 200, {2000});
  auto fit = fit_ols(build_design(rows, ModelSpec{}));
  fit.coefficients[*fit.column_index("ln_k")] = 0.0;
  std::vector<std::uint32_t> grid{1, 2, 5, 10};
  auto curve = effect_curve(fit, ModelSpec{}, grid);
  const double mean_prediction = fit.column_means.dot(fit.coefficients);
  for (const auto& pt : curve.points) CHECK(pt.effect == doctest::Approx(mean_prediction).epsilon(1e-14));
}

TEST_CASE("EQ2 baseline is exactly zero and flags follow p > 0.05") {
  auto rows = random_rows(17, 600, {2000}, -0.03);
  ModelSpec spec{ModelVariant::kEq2};
  auto fit = fit_ols(build_design(rows, spec));
  std::vector<std::uint32_t> grid;
  for (std::uint32_t k = 1; k <= 10; ++k) grid.push_back(k);
  auto curve = effect_curve(fit, spec, grid);
  CHECK(curve.points[0].effect == 0.0);
  CHECK(curve.points[0].significance == Significance::kBaseline);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    auto t = coefficient_test(fit, "k=" + std::to_string(grid[i]));
    CHECK(curve.points[i].effect == t.estimate);
    CHECK(curve.points[i].significance == (t.p > 0.05 ? Significance::kInsignificant : Significance::kSignificant));
  }
  std::vector<std::uint32_t> missing{30};
  CHECK_THROWS_AS(effect_curve(fit, spec, missing), ValidationError);
}

TEST_CASE("TSV writers") {
  Eigen::MatrixXd x(4, 2);
  Eigen::VectorXd y(4);
  x << 1, 0, 1, 1, 1, 2, 1, 3;
  y << 1, 3, 2, 5;
  auto fit = fit_ols(x, y, plain_columns(2, true));
  std::ostringstream out;
  write_fit_tsv(out, fit);
  std::istringstream lines(out.str());
  std::string first;
  std::getline(lines, first);
  CHECK(first.rfind("(intercept)\t", 0) == 0);

  EffectCurve curve{ModelVariant::kEq2, {{1, 0, 0, 0, 0, 0, Significance::kBaseline},
                                         {2, 0, 0, -0.5, -1, 0, Significance::kInsignificant}}};
  std::ostringstream c;
  write_curve_tsv(c, curve);
  CHECK(c.str() == "1\t0\t0\t0\tbaseline\n2\t-0.5\t-1\t0\tno\n");
}
