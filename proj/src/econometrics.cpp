#include "dlab/econometrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "dlab/error.hpp"
#include "dlab/format.hpp"

namespace dlab {

namespace {

double checked_log(double v, const char* what) {
  if (!(v > 0.0)) throw ValidationError(std::string("log of non-positive ") + what);
  return std::log(v);
}

struct LeastSquares {
  Eigen::VectorXd beta;
  Eigen::MatrixXd xtx_inverse;   // (X'X)^-1 in the original column scale
  Eigen::MatrixXd hc_meat_cov;   // (X'X)^-1 X' diag(e^2) X (X'X)^-1
  Eigen::VectorXd residuals;
};

// Column-pivoted QR on columns centred (when an intercept is present) and
// scaled to unit RMS; the solution and inverse are mapped back through the
// affine map beta = T gamma.
LeastSquares solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<DesignColumn>& columns) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  std::optional<Eigen::Index> intercept;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (columns[static_cast<std::size_t>(j)].kind == ColumnKind::kIntercept) intercept = j;
  }

  Eigen::MatrixXd z = x;
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (intercept && j == *intercept) continue;
    const double centre = intercept ? x.col(j).mean() : 0.0;
    z.col(j).array() -= centre;
    double scale = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
    if (!(scale > 0.0)) scale = 1.0;
    z.col(j) /= scale;
    t(j, j) = 1.0 / scale;
    if (intercept) t(*intercept, j) = -centre / scale;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(1e-9);
  if (qr.rank() < p) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < p; ++i) {
      if (!names.empty()) names += ", ";
      names += columns[static_cast<std::size_t>(perm[i])].label;
    }
    throw RankDeficientError("design matrix is rank deficient; dependent columns: " + names);
  }

  const Eigen::VectorXd gamma = qr.solve(y);
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd zz_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();

  LeastSquares out;
  out.residuals = y - z * gamma;
  out.beta = t * gamma;
  out.xtx_inverse = t * zz_inv * t.transpose();
  out.xtx_inverse = 0.5 * (out.xtx_inverse + out.xtx_inverse.transpose()).eval();
  const Eigen::MatrixXd weighted = z.array().colwise() * out.residuals.array().square();
  const Eigen::MatrixXd meat = z.transpose() * weighted;
  Eigen::MatrixXd hc = t * (zz_inv * meat * zz_inv) * t.transpose();
  out.hc_meat_cov = 0.5 * (hc + hc.transpose());
  return out;
}

RegressionFit finish(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<DesignColumn> columns,
                     CovarianceType covariance, std::size_t dof, bool centred_r2) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  LeastSquares ls = solve(x, y, columns);

  RegressionFit fit;
  fit.columns = std::move(columns);
  fit.coefficients = std::move(ls.beta);
  fit.residuals = std::move(ls.residuals);
  fit.column_means = x.colwise().mean().transpose();
  fit.n = n;
  fit.dof = dof;
  fit.covariance_type = covariance;

  const double sse = fit.residuals.squaredNorm();
  fit.sigma2 = sse / static_cast<double>(dof);
  const double sst = centred_r2 ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
  fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);

  if (covariance == CovarianceType::kClassical) {
    fit.covariance = fit.sigma2 * ls.xtx_inverse;
  } else {
    fit.covariance = ls.hc_meat_cov * (static_cast<double>(n) / static_cast<double>(n - p));
  }
  return fit;
}

}  // namespace

Design build_design(std::span<const CohortRow> rows, const ModelSpec& spec) {
  if (rows.empty()) throw ValidationError("cannot build a design from an empty cohort");
  const auto n = static_cast<Eigen::Index>(rows.size());

  std::vector<DesignColumn> columns{{"(intercept)", ColumnKind::kIntercept, 0}};
  std::vector<Eigen::VectorXd> data{Eigen::VectorXd::Ones(n)};
  Eigen::VectorXd y(n);
  Eigen::VectorXd ln_k(n), ln_r(n), ln_c(n);
  std::uint32_t k_max = 0;
  std::set<Year> years;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    y[i] = row.d_value;
    ln_k[i] = checked_log(row.team_size, "team size");
    ln_r[i] = checked_log(static_cast<double>(row.reference_length), "reference length");
    ln_c[i] = checked_log(static_cast<double>(row.citations), "citation count");
    k_max = std::max(k_max, row.team_size);
    years.insert(row.year);
  }

  auto add = [&](std::string label, ColumnKind kind, std::int64_t level, Eigen::VectorXd col) {
    columns.push_back({std::move(label), kind, level});
    data.push_back(std::move(col));
  };

  if (spec.variant == ModelVariant::kEq1) {
    add("ln_k", ColumnKind::kContinuous, 0, ln_k);
    add("ln_r", ColumnKind::kContinuous, 0, ln_r);
    add("ln_c", ColumnKind::kContinuous, 0, ln_c);
  } else {
    add("ln_r", ColumnKind::kContinuous, 0, ln_r);
    add("ln_c", ColumnKind::kContinuous, 0, ln_c);
    add("ln_r_sq", ColumnKind::kContinuous, 0, ln_r.array().square().matrix());
    add("ln_c_sq", ColumnKind::kContinuous, 0, ln_c.array().square().matrix());
    for (std::uint32_t k = 1; k <= k_max; ++k) {
      if (k == spec.team_baseline) continue;
      Eigen::VectorXd col(n);
      for (Eigen::Index i = 0; i < n; ++i) col[i] = rows[static_cast<std::size_t>(i)].team_size == k ? 1.0 : 0.0;
      add("k=" + std::to_string(k), ColumnKind::kTeamDummy, k, std::move(col));
    }
  }
  for (auto it = std::next(years.begin()); it != years.end(); ++it) {
    Eigen::VectorXd col(n);
    for (Eigen::Index i = 0; i < n; ++i) col[i] = rows[static_cast<std::size_t>(i)].year == *it ? 1.0 : 0.0;
    add("year=" + std::to_string(*it), ColumnKind::kYearDummy, *it, std::move(col));
  }

  Design design;
  design.y = std::move(y);
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& col = data[j];
    if (columns[j].kind != ColumnKind::kIntercept && col.maxCoeff() == col.minCoeff()) {
      design.dropped.push_back(columns[j].label);
      continue;
    }
    keep.push_back(static_cast<Eigen::Index>(j));
  }
  design.x.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    design.x.col(static_cast<Eigen::Index>(j)) = data[static_cast<std::size_t>(keep[j])];
    design.columns.push_back(columns[static_cast<std::size_t>(keep[j])]);
  }
  design.groups.reserve(rows.size());
  for (const auto& row : rows) design.groups.push_back(row.year);
  return design;
}

std::optional<std::size_t> RegressionFit::column_index(std::string_view label) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].label == label) return j;
  }
  return std::nullopt;
}

RegressionFit fit_ols(const Design& design, CovarianceType covariance) {
  return fit_ols(design.x, design.y, design.columns, covariance);
}

RegressionFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<DesignColumn> columns,
                      CovarianceType covariance) {
  if (static_cast<std::size_t>(x.cols()) != columns.size() || x.rows() != y.size()) {
    throw ValidationError("design dimensions do not match");
  }
  if (x.rows() <= x.cols()) {
    throw ValidationError("need more observations than regressors (n=" + std::to_string(x.rows()) +
                          ", p=" + std::to_string(x.cols()) + ")");
  }
  const bool has_intercept = std::any_of(columns.begin(), columns.end(),
                                         [](const DesignColumn& c) { return c.kind == ColumnKind::kIntercept; });
  const auto dof = static_cast<std::size_t>(x.rows() - x.cols());
  return finish(x, y, std::move(columns), covariance, dof, has_intercept);
}

RegressionFit fit_within(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const Year> groups,
                         std::vector<DesignColumn> columns) {
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(groups.size()) != n || y.size() != n ||
      static_cast<std::size_t>(x.cols()) != columns.size()) {
    throw ValidationError("design dimensions do not match");
  }
  std::map<Year, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < n; ++i) members[groups[static_cast<std::size_t>(i)]].push_back(i);
  const auto g = static_cast<Eigen::Index>(members.size());
  if (n <= x.cols() + g) throw ValidationError("need more observations than regressors plus groups");

  Eigen::MatrixXd xd = x;
  Eigen::VectorXd yd = y;
  for (const auto& [year, idx] : members) {
    Eigen::RowVectorXd xm = Eigen::RowVectorXd::Zero(x.cols());
    double ym = 0.0;
    for (auto i : idx) {
      xm += x.row(i);
      ym += y[i];
    }
    xm /= static_cast<double>(idx.size());
    ym /= static_cast<double>(idx.size());
    for (auto i : idx) {
      xd.row(i) -= xm;
      yd[i] -= ym;
    }
  }
  const auto dof = static_cast<std::size_t>(n - x.cols() - g);
  return finish(xd, yd, std::move(columns), CovarianceType::kClassical, dof, false);
}

CoefficientTest coefficient_test(const RegressionFit& fit, std::string_view name) {
  auto j = fit.column_index(name);
  if (!j) throw ValidationError("unknown coefficient " + std::string(name));
  CoefficientTest out;
  const auto idx = static_cast<Eigen::Index>(*j);
  out.estimate = fit.coefficients[idx];
  out.std_error = std::sqrt(std::max(0.0, fit.covariance(idx, idx)));
  if (out.std_error == 0.0) {
    out.degenerate = true;
    if (out.estimate == 0.0) {
      out.t = 0.0;
      out.p = 1.0;
    } else {
      out.t = std::copysign(std::numeric_limits<double>::infinity(), out.estimate);
      out.p = 0.0;
    }
    return out;
  }
  out.t = out.estimate / out.std_error;
  boost::math::students_t dist(static_cast<double>(fit.dof));
  out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  return out;
}

EffectCurve effect_curve(const RegressionFit& fit, const ModelSpec& spec, std::span<const std::uint32_t> team_sizes) {
  EffectCurve curve;
  curve.variant = spec.variant;
  const auto p = static_cast<Eigen::Index>(fit.columns.size());

  std::optional<Eigen::Index> slope;
  Significance slope_flag = Significance::kInsignificant;
  if (spec.variant == ModelVariant::kEq1) {
    auto j = fit.column_index("ln_k");
    if (!j) throw ValidationError("fit has no ln_k term");
    slope = static_cast<Eigen::Index>(*j);
    slope_flag = coefficient_test(fit, "ln_k").p > kSignificanceLevel ? Significance::kInsignificant
                                                                       : Significance::kSignificant;
  }

  for (std::uint32_t k : team_sizes) {
    if (k < 1) throw ValidationError("team size must be >= 1");
    Eigen::VectorXd x0 = fit.column_means;
    EffectPoint pt;
    pt.team_size = k;
    std::optional<Eigen::Index> dummy;
    if (spec.variant == ModelVariant::kEq1) {
      x0[*slope] = std::log(static_cast<double>(k));
    } else {
      for (Eigen::Index j = 0; j < p; ++j) {
        const auto& col = fit.columns[static_cast<std::size_t>(j)];
        if (col.kind != ColumnKind::kTeamDummy) continue;
        x0[j] = col.level == k ? 1.0 : 0.0;
        if (col.level == k) dummy = j;
      }
      if (k != spec.team_baseline && !dummy) {
        throw ValidationError("no fitted dummy for team size " + std::to_string(k));
      }
    }
    pt.predicted = x0.dot(fit.coefficients);
    pt.band = kNormal95 * std::sqrt(std::max(0.0, x0.dot(fit.covariance * x0)));

    if (spec.variant == ModelVariant::kEq1) {
      pt.effect = pt.predicted;
      pt.lo95 = pt.predicted - pt.band;
      pt.hi95 = pt.predicted + pt.band;
      pt.significance = slope_flag;
    } else if (!dummy) {
      pt.effect = 0.0;
      pt.lo95 = 0.0;
      pt.hi95 = 0.0;
      pt.significance = Significance::kBaseline;
    } else {
      auto test = coefficient_test(fit, fit.columns[static_cast<std::size_t>(*dummy)].label);
      pt.effect = test.estimate;
      pt.lo95 = test.estimate - kNormal95 * test.std_error;
      pt.hi95 = test.estimate + kNormal95 * test.std_error;
      pt.significance = test.p > kSignificanceLevel ? Significance::kInsignificant : Significance::kSignificant;
    }
    curve.points.push_back(pt);
  }
  return curve;
}

std::string_view to_string(Significance s) {
  switch (s) {
    case Significance::kBaseline:
      return "baseline";
    case Significance::kSignificant:
      return "yes";
    case Significance::kInsignificant:
      return "no";
  }
  return "no";
}

void write_fit_tsv(std::ostream& out, const RegressionFit& fit) {
  for (const auto& col : fit.columns) {
    auto test = coefficient_test(fit, col.label);
    out << col.label << '\t' << format_double(test.estimate) << '\t' << format_double(test.std_error) << '\t'
        << format_double(test.t) << '\t' << format_double(test.p) << '\n';
  }
}

void write_curve_tsv(std::ostream& out, const EffectCurve& curve) {
  for (const auto& pt : curve.points) {
    out << pt.team_size << '\t' << format_double(pt.effect) << '\t' << format_double(pt.lo95) << '\t'
        << format_double(pt.hi95) << '\t' << to_string(pt.significance) << '\n';
  }
}

}  // namespace dlab
