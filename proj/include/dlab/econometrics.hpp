#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlab/cohort.hpp"

namespace dlab {

enum class ModelVariant {
  kEq1,  // D ~ ln k + ln r + ln c + year effects
  kEq2,  // D ~ ln r + ln c + (ln r)^2 + (ln c)^2 + team-size dummies + year effects
};

struct ModelSpec {
  ModelVariant variant = ModelVariant::kEq1;
  std::uint32_t team_baseline = 1;  // EQ2 reference category
};

enum class ColumnKind { kIntercept, kContinuous, kTeamDummy, kYearDummy };

struct DesignColumn {
  std::string label;
  ColumnKind kind = ColumnKind::kContinuous;
  std::int64_t level = 0;  // team size or year for dummy columns
};

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<DesignColumn> columns;
  std::vector<std::string> dropped;  // constant columns removed before fitting
  std::vector<Year> groups;          // publication year of each row
};

/// Columns are ordered intercept, continuous terms, team dummies, year
/// dummies. Year dummies use the smallest year as baseline, so a one-year
/// cohort has none. Constant non-intercept columns are dropped and listed
/// in Design::dropped.
Design build_design(std::span<const CohortRow> rows, const ModelSpec& spec);

enum class CovarianceType {
  kClassical,  // sigma^2 (X'X)^-1
  kHC1,        // White sandwich scaled by n / (n - p)
};

struct RegressionFit {
  std::vector<DesignColumn> columns;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residuals;
  Eigen::VectorXd column_means;
  std::size_t n = 0;
  std::size_t dof = 0;
  double r_squared = 0.0;
  double sigma2 = 0.0;
  CovarianceType covariance_type = CovarianceType::kClassical;

  std::optional<std::size_t> column_index(std::string_view label) const;
  Eigen::VectorXd standard_errors() const { return covariance.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

/// Least squares through column-pivoted Householder QR on centred and
/// scaled columns; results are mapped back to the original scale. Throws
/// ValidationError when n <= p and RankDeficientError naming the dependent
/// columns.
RegressionFit fit_ols(const Design& design, CovarianceType covariance = CovarianceType::kClassical);

RegressionFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<DesignColumn> columns,
                      CovarianceType covariance = CovarianceType::kClassical);

/// Within (group-demeaned) estimator for y = X b + alpha_g + e, the form
/// xtreg fits with fixed effects. `x` holds only the non-dummy regressors,
/// without an intercept. Degrees of freedom are n - p - G.
RegressionFit fit_within(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const Year> groups,
                         std::vector<DesignColumn> columns);

struct CoefficientTest {
  double estimate = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double p = 1.0;         // two-sided, Student t with fit.dof degrees of freedom
  bool degenerate = false;  // zero standard error
};

/// Throws ValidationError for an unknown coefficient name.
CoefficientTest coefficient_test(const RegressionFit& fit, std::string_view name);

enum class Significance { kBaseline, kSignificant, kInsignificant };

struct EffectPoint {
  std::uint32_t team_size = 0;
  double predicted = 0.0;  // x0(k)' b with other covariates at their means
  double band = 0.0;       // 1.96 sqrt(x0' V x0)
  double effect = 0.0;     // EQ1: predicted; EQ2: team dummy coefficient
  double lo95 = 0.0;
  double hi95 = 0.0;
  Significance significance = Significance::kInsignificant;
};

struct EffectCurve {
  ModelVariant variant = ModelVariant::kEq1;
  std::vector<EffectPoint> points;
};

inline constexpr double kNormal95 = 1.96;
inline constexpr double kSignificanceLevel = 0.05;

/// Marginal effects at means over `team_sizes`. For EQ1 the significance of
/// every point is that of the ln k slope. For EQ2 each point carries its own
/// dummy test; the baseline is exactly zero. Throws ValidationError when an
/// EQ2 team size has no fitted dummy.
EffectCurve effect_curve(const RegressionFit& fit, const ModelSpec& spec, std::span<const std::uint32_t> team_sizes);

/// `term estimate se t p`
void write_fit_tsv(std::ostream& out, const RegressionFit& fit);
/// `k effect lo95 hi95 significant`, significant in {yes, no, baseline}.
void write_curve_tsv(std::ostream& out, const EffectCurve& curve);

std::string_view to_string(Significance s);

}  // namespace dlab
