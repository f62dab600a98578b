#pragma once

#include "geodid/errors.hpp"
#include "geodid/panel_data.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

namespace geodid {

enum class KernelKind { uniform, triangular, epanechnikov };

const char* kernel_name(KernelKind kind);
KernelKind kernel_from_name(std::string_view name);  // DomainError on unknown

//! Kernel weight at scaled distance u. All kernels are nonnegative,
//! symmetric, maximal at zero and vanish for |u| > 1:
//!   uniform        1(|u| <= 1) * 0.5
//!   triangular     max(0, 1 - |u|)
//!   epanechnikov   max(0, 0.75 * (1 - u^2))
double kernel_weight(KernelKind kind, double u);

//! left: D < 0, right: D >= 0. Ties at the cutoff sit on the treated side.
enum class Side { left, right };

const char* side_name(Side side);

inline Side side_of(double distance) {
  return distance < 0.0 ? Side::left : Side::right;
}

//! How the bandwidth is chosen. There is deliberately no default: callers
//! must pick one of the three strategies explicitly.
class BandwidthSpec {
public:
  enum class Kind { fixed, leave_one_out_cv, rule_of_thumb };

  //! Fixed bandwidth in the units of the running variable; h must be > 0.
  static BandwidthSpec fixed(double h);

  //! Exact leave-one-out cross-validation over a grid of candidate
  //! bandwidths (all > 0, nonempty). Ties break toward the smaller h.
  static BandwidthSpec leave_one_out_cv(std::vector<double> grid);

  //! Silverman-style pilot: 1.06 * sd(distance) * n^(-1/5). A heuristic,
  //! not a default.
  static BandwidthSpec rule_of_thumb();

  Kind kind() const { return kind_; }
  double fixed_value() const { return fixed_h_; }
  const std::vector<double>& grid() const { return grid_; }

private:
  explicit BandwidthSpec(Kind kind) : kind_(kind) {}

  Kind kind_;
  double fixed_h_ = 0.0;
  std::vector<double> grid_;
};

//! Result of a one-sided kernel-weighted polynomial fit.
struct LocalFit {
  //! Length order+1, intercept first. The fit is centered at the cutoff, so
  //! coefficients(0) is the fitted value at D = 0 and coefficients(1) the
  //! slope there.
  Eigen::VectorXd coefficients;
  //! One entry per point on the requested side, in input order.
  Eigen::VectorXd residuals;
  //! Kernel weights aligned with residuals; zero outside the window.
  Eigen::VectorXd weights;
  //! Number of points with strictly positive weight.
  std::size_t n_effective = 0;
  double bandwidth_used = 0.0;
};

//! Fits value ~ sum_k beta_k D^k by weighted least squares over the points
//! on one side of the cutoff, with weights K(D / bandwidth). Throws
//! InsufficientDataError when fewer than order+1 points carry positive
//! weight (the message names the side) and SingularityError when the design
//! is rank-deficient at a relative tolerance of 1e-10.
LocalFit fit_local_polynomial(const CrossSection& points, Side side, int order,
                              KernelKind kernel, double bandwidth);

//! Resolves a BandwidthSpec against the data:
//!   fixed           returns h unchanged;
//!   leave_one_out_cv returns the grid value minimizing the summed squared
//!                   leave-one-out prediction error of local fits centered
//!                   at each held-out point, using only neighbors from the
//!                   held-out point's side of the cutoff; a candidate h is
//!                   feasible only if every held-out point admits a fit;
//!   rule_of_thumb   1.06 * sd(distance) * n^(-1/5).
//! CV and rule-of-thumb require points on both sides. Throws
//! NoFeasibleBandwidthError when no grid value is feasible.
double select_bandwidth(const CrossSection& points, const BandwidthSpec& spec,
                        int order, KernelKind kernel);

namespace detail {

//! Solves the weighted least-squares problem min_b ||sqrt(W)(y - X b)||^2
//! via column-pivoted QR of the sqrt-weighted design; rank deficiency below
//! a relative tolerance of 1e-10 raises SingularityError. `what` names the
//! design in error messages.
Eigen::VectorXd wls_solve(const Eigen::MatrixXd& design,
                          const Eigen::VectorXd& response,
                          const Eigen::VectorXd& weights, const char* what);

}  // namespace detail

}  // namespace geodid
