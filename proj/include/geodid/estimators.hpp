#pragma once

#include "geodid/local_regression.hpp"
#include "geodid/panel_data.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace geodid {

//! Estimation settings shared by every estimator. The bandwidth strategy
//! has no default and must be chosen explicitly; the remaining defaults
//! (triangular kernel, local linear, 95% level) follow standard RD practice.
struct EstimatorConfig {
  BandwidthSpec bandwidth;
  KernelKind kernel = KernelKind::triangular;
  int order = 1;
  double confidence_level = 0.95;
};

//! Sharp RD estimate: the outcome's jump at the cutoff.
//! tau_hat = intercept_right - intercept_left exactly, and the interval is
//! tau_hat +/- z(level) * se. se is NaN when inference is infeasible.
struct RdEstimate {
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double intercept_left = 0.0;   // y- limit at the cutoff
  double intercept_right = 0.0;  // y+ limit at the cutoff
  std::size_t n_left = 0;        // effective points per side
  std::size_t n_right = 0;
  double bandwidth_used = 0.0;
};

enum class DiffDiscVariant { first_difference, pooled };

const char* variant_name(DiffDiscVariant variant);

//! Difference-in-discontinuities estimate. disc_pre and disc_post are the
//! per-period discontinuities computed with the same kernel, bandwidth and
//! order as tau_hat, so tau_hat = disc_post - disc_pre and
//! gamma_hat = disc_pre hold by construction.
struct DiffDiscEstimate {
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double gamma_hat = 0.0;   // pre-period discontinuity (time-invariant jump)
  double disc_pre = 0.0;    // y0+ - y0-
  double disc_post = 0.0;   // y1+ - y1-
  DiffDiscVariant variant = DiffDiscVariant::first_difference;
  double bandwidth_used = 0.0;
  std::size_t n_units_effective = 0;
  std::size_t n_left = 0;  // effective units per side
  std::size_t n_right = 0;
};

//! Coefficients of the pooled interaction regression. The regressors come in
//! four blocks of order+1 polynomial terms: base, side, period, and
//! period x side; `all` stores them in that block order. The eight named
//! fields are the intercept and slope of each block (the full set when
//! order == 1). beta0, the period x side intercept, is the
//! difference-in-discontinuities estimate.
struct PooledCoefficients {
  double delta0 = 0.0, delta1 = 0.0;  // base level and slope
  double gamma0 = 0.0, gamma1 = 0.0;  // treated-side jump and slope change
  double alpha0 = 0.0, alpha1 = 0.0;  // period-1 level and slope shift
  double beta0 = 0.0, beta1 = 0.0;    // diff-in-disc jump and slope change
  Eigen::VectorXd all;                // length 4 * (order + 1)
};

struct PooledEstimate {
  DiffDiscEstimate estimate;
  PooledCoefficients coefficients;
};

//! Weighted design, residuals and weights of a fit, as consumed by
//! robust_standard_error. When `cluster` is nonempty it assigns one cluster
//! id per row and scores are summed within cluster before the meat matrix.
struct FitContext {
  Eigen::MatrixXd design;
  Eigen::VectorXd residuals;
  Eigen::VectorXd weights;
  std::vector<std::int64_t> cluster;
};

//! Sharp RD at the cutoff: one local polynomial fit per side with a common
//! bandwidth; tau_hat is the difference of the two intercepts and the SE is
//! the HC1 sandwich on the stacked two-side fit.
RdEstimate estimate_sharp_rd(const CrossSection& points,
                             const EstimatorConfig& config);

//! Difference-in-discontinuities, first-difference form: a sharp RD on
//! y1 - y0. The bandwidth is selected once on the differenced outcome and
//! held fixed for the per-period decomposition fields. Requires a valid
//! balanced panel.
DiffDiscEstimate estimate_diff_disc_fd(const PanelDataset& data,
                                       const EstimatorConfig& config);

//! Difference-in-discontinuities, pooled interaction form: a single
//! kernel-weighted regression over both periods' rows with full
//! period x side x distance interactions; tau_hat is the period x side
//! intercept. Standard errors cluster by unit (each unit contributes two
//! rows). Requires a valid balanced panel.
PooledEstimate estimate_diff_disc_pooled(const PanelDataset& data,
                                         const EstimatorConfig& config);

//! Pooled form for repeated cross-sections: unit ids need not match across
//! periods (no balance requirement), so this also accepts data where
//! first-differencing is impossible. Each row is its own cluster when ids
//! do not repeat.
PooledEstimate estimate_diff_disc_pooled_rcs(const PanelDataset& data,
                                             const EstimatorConfig& config);

//! Heteroskedasticity-consistent sandwich standard error of the contrast
//! c'beta, with HC1 small-sample scaling n/(n-k) over the rows with positive
//! weight. With clustering the scores are summed within cluster and the
//! scaling becomes (G/(G-1)) * ((n-1)/(n-k)), which reduces to HC1 when
//! every row is its own cluster. Throws InferenceError when the degrees of
//! freedom are non-positive (or fewer than two clusters).
double robust_standard_error(const FitContext& context,
                             const Eigen::VectorXd& contrast);

//! estimate +/- z * se with z the standard normal quantile of (1+level)/2.
std::pair<double, double> confidence_interval(double estimate, double se,
                                              double level);

}  // namespace geodid
