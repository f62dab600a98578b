#include "geodid/estimators.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace geodid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate_config(const EstimatorConfig& config) {
  if (config.order < 1) {
    throw DomainError("polynomial order must be >= 1");
  }
  if (!(config.confidence_level > 0.0) || !(config.confidence_level < 1.0)) {
    throw DomainError("confidence level must lie strictly inside (0,1)");
  }
}

struct SideData {
  std::vector<double> x;
  std::vector<double> y;
};

SideData side_data(const CrossSection& points, Side side) {
  SideData out;
  for (const auto& p : points.points) {
    if (side_of(p.distance) == side) {
      out.x.push_back(p.distance);
      out.y.push_back(p.value);
    }
  }
  return out;
}

// Sharp RD with the bandwidth already resolved. The SE comes from the HC1
// sandwich on the stacked two-side design: base polynomial columns plus the
// same columns interacted with the treated-side indicator, so the contrast
// on the interaction intercept is exactly intercept_right - intercept_left.
RdEstimate sharp_rd_fixed_h(const CrossSection& points,
                            const EstimatorConfig& config, double h) {
  const LocalFit left =
      fit_local_polynomial(points, Side::left, config.order, config.kernel, h);
  const LocalFit right =
      fit_local_polynomial(points, Side::right, config.order, config.kernel, h);

  RdEstimate est;
  est.intercept_left = left.coefficients(0);
  est.intercept_right = right.coefficients(0);
  est.tau_hat = est.intercept_right - est.intercept_left;
  est.n_left = left.n_effective;
  est.n_right = right.n_effective;
  est.bandwidth_used = h;

  const int k = config.order + 1;
  const Eigen::Index rows =
      static_cast<Eigen::Index>(left.n_effective + right.n_effective);
  FitContext ctx;
  ctx.design = Eigen::MatrixXd::Zero(rows, 2 * k);
  ctx.residuals.resize(rows);
  ctx.weights.resize(rows);

  Eigen::Index row = 0;
  const SideData ls = side_data(points, Side::left);
  const SideData rs = side_data(points, Side::right);
  const auto emit = [&](const SideData& data, const LocalFit& fit,
                        bool treated) {
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      const double w = fit.weights(static_cast<Eigen::Index>(i));
      if (w <= 0.0) continue;
      double term = 1.0;
      for (int j = 0; j < k; ++j) {
        ctx.design(row, j) = term;
        if (treated) ctx.design(row, k + j) = term;
        term *= data.x[i];
      }
      ctx.residuals(row) = fit.residuals(static_cast<Eigen::Index>(i));
      ctx.weights(row) = w;
      ++row;
    }
  };
  emit(ls, left, false);
  emit(rs, right, true);

  Eigen::VectorXd contrast = Eigen::VectorXd::Zero(2 * k);
  contrast(k) = 1.0;
  try {
    est.se = robust_standard_error(ctx, contrast);
    std::tie(est.ci_lower, est.ci_upper) =
        confidence_interval(est.tau_hat, est.se, config.confidence_level);
  } catch (const InferenceError&) {
    est.se = kNaN;
    est.ci_lower = kNaN;
    est.ci_upper = kNaN;
  }
  return est;
}

// Intercept gap only, used for the per-period decomposition fields.
double rd_gap(const CrossSection& points, const EstimatorConfig& config,
              double h) {
  const LocalFit left =
      fit_local_polynomial(points, Side::left, config.order, config.kernel, h);
  const LocalFit right =
      fit_local_polynomial(points, Side::right, config.order, config.kernel, h);
  return right.coefficients(0) - left.coefficients(0);
}

PooledEstimate pooled_core(const PanelDataset& data,
                           const EstimatorConfig& config) {
  // Bandwidth is selected once on the pooled sample and held fixed for the
  // decomposition fields.
  CrossSection pooled;
  pooled.points.reserve(data.observations.size());
  for (const auto& obs : data.observations) {
    pooled.points.push_back({obs.unit_id + "@" + std::to_string(obs.period),
                             obs.distance, obs.outcome});
  }
  const double h =
      select_bandwidth(pooled, config.bandwidth, config.order, config.kernel);

  const int k = config.order + 1;
  const int ncol = 4 * k;

  std::vector<const Observation*> rows;
  rows.reserve(data.observations.size());
  for (const auto& obs : data.observations) {
    if (kernel_weight(config.kernel, obs.distance / h) > 0.0) {
      rows.push_back(&obs);
    }
  }
  if (rows.size() < static_cast<std::size_t>(ncol)) {
    throw InsufficientDataError(
        "pooled sample: " + std::to_string(rows.size()) +
        " observation(s) with positive weight inside bandwidth " +
        std::to_string(h) + ", need at least " + std::to_string(ncol));
  }

  Eigen::MatrixXd design =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), ncol);
  Eigen::VectorXd response(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd weights(static_cast<Eigen::Index>(rows.size()));
  std::vector<std::int64_t> cluster(rows.size());
  std::unordered_map<std::string, std::int64_t> unit_index;
  std::size_t n_left_units = 0;
  std::size_t n_right_units = 0;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Observation& obs = *rows[i];
    const bool treated = obs.distance >= 0.0;
    const bool post = obs.period == 1;
    double term = 1.0;
    const Eigen::Index r = static_cast<Eigen::Index>(i);
    for (int j = 0; j < k; ++j) {
      design(r, j) = term;
      if (treated) design(r, k + j) = term;
      if (post) design(r, 2 * k + j) = term;
      if (treated && post) design(r, 3 * k + j) = term;
      term *= obs.distance;
    }
    response(r) = obs.outcome;
    weights(r) = kernel_weight(config.kernel, obs.distance / h);

    auto [it, inserted] =
        unit_index.try_emplace(obs.unit_id,
                               static_cast<std::int64_t>(unit_index.size()));
    if (inserted) {
      if (treated) {
        ++n_right_units;
      } else {
        ++n_left_units;
      }
    }
    cluster[i] = it->second;
  }

  const Eigen::VectorXd beta =
      detail::wls_solve(design, response, weights, "pooled design");

  PooledEstimate out;
  PooledCoefficients& coef = out.coefficients;
  coef.all = beta;
  coef.delta0 = beta(0);
  coef.delta1 = beta(1);
  coef.gamma0 = beta(k);
  coef.gamma1 = beta(k + 1);
  coef.alpha0 = beta(2 * k);
  coef.alpha1 = beta(2 * k + 1);
  coef.beta0 = beta(3 * k);
  coef.beta1 = beta(3 * k + 1);

  DiffDiscEstimate& est = out.estimate;
  est.tau_hat = coef.beta0;
  est.variant = DiffDiscVariant::pooled;
  est.bandwidth_used = h;
  est.n_left = n_left_units;
  est.n_right = n_right_units;
  est.n_units_effective = n_left_units + n_right_units;

  FitContext ctx;
  ctx.design = std::move(design);
  ctx.residuals = response - ctx.design * beta;
  ctx.weights = std::move(weights);
  ctx.cluster = std::move(cluster);
  Eigen::VectorXd contrast = Eigen::VectorXd::Zero(ncol);
  contrast(3 * k) = 1.0;
  try {
    est.se = robust_standard_error(ctx, contrast);
    std::tie(est.ci_lower, est.ci_upper) =
        confidence_interval(est.tau_hat, est.se, config.confidence_level);
  } catch (const InferenceError&) {
    est.se = kNaN;
    est.ci_lower = kNaN;
    est.ci_upper = kNaN;
  }

  est.disc_pre = rd_gap(period_slice(data, 0), config, h);
  est.disc_post = rd_gap(period_slice(data, 1), config, h);
  est.gamma_hat = est.disc_pre;
  return out;
}

}  // namespace

const char* variant_name(DiffDiscVariant variant) {
  return variant == DiffDiscVariant::first_difference ? "first_difference"
                                                      : "pooled";
}

RdEstimate estimate_sharp_rd(const CrossSection& points,
                             const EstimatorConfig& config) {
  validate_config(config);
  const double h =
      select_bandwidth(points, config.bandwidth, config.order, config.kernel);
  return sharp_rd_fixed_h(points, config, h);
}

DiffDiscEstimate estimate_diff_disc_fd(const PanelDataset& data,
                                       const EstimatorConfig& config) {
  validate_config(config);
  const CrossSection differenced = first_difference(data);
  const double h = select_bandwidth(differenced, config.bandwidth,
                                    config.order, config.kernel);
  const RdEstimate rd = sharp_rd_fixed_h(differenced, config, h);

  DiffDiscEstimate est;
  est.tau_hat = rd.tau_hat;
  est.se = rd.se;
  est.ci_lower = rd.ci_lower;
  est.ci_upper = rd.ci_upper;
  est.variant = DiffDiscVariant::first_difference;
  est.bandwidth_used = h;
  est.n_left = rd.n_left;
  est.n_right = rd.n_right;
  est.n_units_effective = rd.n_left + rd.n_right;
  est.disc_pre = rd_gap(period_slice(data, 0), config, h);
  est.disc_post = rd_gap(period_slice(data, 1), config, h);
  est.gamma_hat = est.disc_pre;
  return est;
}

PooledEstimate estimate_diff_disc_pooled(const PanelDataset& data,
                                         const EstimatorConfig& config) {
  validate_config(config);
  ValidationReport report = validate_panel(data);
  if (!report.is_valid) {
    throw ValidationError(
        "panel failed validation; for repeated cross-sections use the "
        "repeated-cross-section entry path",
        std::move(report));
  }
  return pooled_core(data, config);
}

PooledEstimate estimate_diff_disc_pooled_rcs(const PanelDataset& data,
                                             const EstimatorConfig& config) {
  validate_config(config);
  ValidationReport report = detail::validate_repeated_cross_sections(data);
  if (!report.is_valid) {
    throw ValidationError("repeated cross-sections failed validation",
                          std::move(report));
  }
  return pooled_core(data, config);
}

double robust_standard_error(const FitContext& context,
                             const Eigen::VectorXd& contrast) {
  const Eigen::Index n = context.design.rows();
  const Eigen::Index k = context.design.cols();
  if (context.residuals.size() != n || context.weights.size() != n) {
    throw DomainError("fit context dimensions disagree");
  }
  if (contrast.size() != k) {
    throw DomainError("contrast length does not match the design");
  }
  if (!context.cluster.empty() &&
      context.cluster.size() != static_cast<std::size_t>(n)) {
    throw DomainError("cluster assignment length does not match the design");
  }

  Eigen::Index n_eff = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (context.weights(i) > 0.0) ++n_eff;
  }
  if (n_eff <= k) {
    throw InferenceError("degrees of freedom are non-positive (" +
                         std::to_string(n_eff) + " effective rows, " +
                         std::to_string(k) + " coefficients)");
  }

  const Eigen::MatrixXd bread_inv = context.design.transpose() *
                                    context.weights.asDiagonal() *
                                    context.design;
  const Eigen::VectorXd b = bread_inv.ldlt().solve(contrast);
  if (!b.allFinite()) {
    throw SingularityError("sandwich bread matrix is singular");
  }

  const double dn = static_cast<double>(n_eff);
  const double dk = static_cast<double>(k);
  double sum = 0.0;
  double factor = 1.0;
  if (context.cluster.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = context.weights(i);
      if (w <= 0.0) continue;
      const double s = w * context.residuals(i) * context.design.row(i).dot(b);
      sum += s * s;
    }
    factor = dn / (dn - dk);  // HC1
  } else {
    std::unordered_map<std::int64_t, double> by_cluster;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = context.weights(i);
      if (w <= 0.0) continue;
      by_cluster[context.cluster[static_cast<std::size_t>(i)]] +=
          w * context.residuals(i) * context.design.row(i).dot(b);
    }
    const double g = static_cast<double>(by_cluster.size());
    if (by_cluster.size() < 2) {
      throw InferenceError("cluster-robust variance needs at least 2 clusters");
    }
    for (const auto& [id, s] : by_cluster) {
      sum += s * s;
    }
    // CR1; collapses to HC1's n/(n-k) when every row is its own cluster.
    factor = (g / (g - 1.0)) * ((dn - 1.0) / (dn - dk));
  }
  return std::sqrt(std::max(factor * sum, 0.0));
}

std::pair<double, double> confidence_interval(double estimate, double se,
                                              double level) {
  if (!(level > 0.0) || !(level < 1.0)) {
    throw DomainError("confidence level must lie strictly inside (0,1)");
  }
  const boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 0.5 * (1.0 + level));
  return {estimate - z * se, estimate + z * se};
}

}  // namespace geodid
