#include "geodid/local_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

namespace geodid {

namespace {

constexpr double kRankTolerance = 1e-10;

struct SideData {
  std::vector<double> x;
  std::vector<double> y;
};

SideData side_points(const CrossSection& points, Side side) {
  SideData out;
  for (const auto& p : points.points) {
    if (side_of(p.distance) == side) {
      out.x.push_back(p.distance);
      out.y.push_back(p.value);
    }
  }
  return out;
}

double polyval(const Eigen::VectorXd& coeffs, double x) {
  double value = 0.0;
  for (Eigen::Index k = coeffs.size() - 1; k >= 0; --k) {
    value = value * x + coeffs(k);
  }
  return value;
}

// Fit centered at `center` using the subset of (x, y) with positive kernel
// weight. Returns nothing when fewer than order+1 points carry weight.
std::optional<Eigen::VectorXd> try_local_fit(const std::vector<double>& x,
                                             const std::vector<double>& y,
                                             std::size_t skip, double center,
                                             double h, int order,
                                             KernelKind kernel) {
  const int k = order + 1;
  std::vector<double> xs, ys, ws;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i == skip) continue;
    const double w = kernel_weight(kernel, (x[i] - center) / h);
    if (w > 0.0) {
      xs.push_back(x[i] - center);
      ys.push_back(y[i]);
      ws.push_back(w);
    }
  }
  if (static_cast<int>(xs.size()) < k) return std::nullopt;

  Eigen::MatrixXd design(xs.size(), k);
  Eigen::VectorXd response(xs.size());
  Eigen::VectorXd weights(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double term = 1.0;
    for (int j = 0; j < k; ++j) {
      design(i, j) = term;
      term *= xs[i];
    }
    response(i) = ys[i];
    weights(i) = ws[i];
  }
  try {
    return detail::wls_solve(design, response, weights, "local fit");
  } catch (const SingularityError&) {
    return std::nullopt;
  }
}

// Summed squared leave-one-out prediction error over every point, or
// nothing when some held-out point admits no feasible fit at this h.
std::optional<double> loo_cv_score(const SideData sides[2], double h,
                                   int order, KernelKind kernel) {
  double total = 0.0;
  for (int s = 0; s < 2; ++s) {
    const SideData& side = sides[s];
    for (std::size_t i = 0; i < side.x.size(); ++i) {
      const auto beta =
          try_local_fit(side.x, side.y, i, side.x[i], h, order, kernel);
      if (!beta) return std::nullopt;
      const double err = side.y[i] - (*beta)(0);
      total += err * err;
    }
  }
  return total;
}

}  // namespace

const char* kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::uniform:
      return "uniform";
    case KernelKind::triangular:
      return "triangular";
    case KernelKind::epanechnikov:
      return "epanechnikov";
  }
  return "unknown";
}

KernelKind kernel_from_name(std::string_view name) {
  if (name == "uniform") return KernelKind::uniform;
  if (name == "triangular") return KernelKind::triangular;
  if (name == "epanechnikov") return KernelKind::epanechnikov;
  throw DomainError("unknown kernel '" + std::string(name) + "'");
}

double kernel_weight(KernelKind kind, double u) {
  const double a = std::abs(u);
  switch (kind) {
    case KernelKind::uniform:
      return a <= 1.0 ? 0.5 : 0.0;
    case KernelKind::triangular:
      return std::max(0.0, 1.0 - a);
    case KernelKind::epanechnikov:
      return std::max(0.0, 0.75 * (1.0 - u * u));
  }
  return 0.0;
}

const char* side_name(Side side) {
  return side == Side::left ? "left" : "right";
}

BandwidthSpec BandwidthSpec::fixed(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("fixed bandwidth must be a positive finite number");
  }
  BandwidthSpec spec(Kind::fixed);
  spec.fixed_h_ = h;
  return spec;
}

BandwidthSpec BandwidthSpec::leave_one_out_cv(std::vector<double> grid) {
  if (grid.empty()) {
    throw DomainError("cross-validation grid must be nonempty");
  }
  for (double h : grid) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw DomainError("cross-validation grid entries must be positive");
    }
  }
  BandwidthSpec spec(Kind::leave_one_out_cv);
  spec.grid_ = std::move(grid);
  return spec;
}

BandwidthSpec BandwidthSpec::rule_of_thumb() {
  return BandwidthSpec(Kind::rule_of_thumb);
}

namespace detail {

Eigen::VectorXd wls_solve(const Eigen::MatrixXd& design,
                          const Eigen::VectorXd& response,
                          const Eigen::VectorXd& weights, const char* what) {
  Eigen::VectorXd root_w = weights.array().sqrt();
  Eigen::MatrixXd scaled = root_w.asDiagonal() * design;
  Eigen::VectorXd target = root_w.asDiagonal() * response;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < design.cols()) {
    throw SingularityError(std::string(what) +
                           ": rank-deficient design (rank " +
                           std::to_string(qr.rank()) + " of " +
                           std::to_string(design.cols()) + ")");
  }
  return qr.solve(target);
}

}  // namespace detail

LocalFit fit_local_polynomial(const CrossSection& points, Side side, int order,
                              KernelKind kernel, double bandwidth) {
  if (order < 1) {
    throw DomainError("polynomial order must be >= 1");
  }
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw DomainError("bandwidth must be a positive finite number");
  }

  const SideData data = side_points(points, side);
  const int k = order + 1;

  std::vector<double> xs, ys, ws;
  Eigen::VectorXd all_weights(data.x.size());
  std::size_t n_effective = 0;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const double w = kernel_weight(kernel, data.x[i] / bandwidth);
    all_weights(static_cast<Eigen::Index>(i)) = w;
    if (w > 0.0) {
      ++n_effective;
      xs.push_back(data.x[i]);
      ys.push_back(data.y[i]);
      ws.push_back(w);
    }
  }
  if (n_effective < static_cast<std::size_t>(k)) {
    throw InsufficientDataError(
        std::string(side_name(side)) + " side: " +
        std::to_string(n_effective) + " point(s) with positive weight inside "
        "bandwidth " + std::to_string(bandwidth) + ", need at least " +
        std::to_string(k));
  }

  Eigen::MatrixXd design(xs.size(), k);
  Eigen::VectorXd response(xs.size());
  Eigen::VectorXd weights(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double term = 1.0;
    for (int j = 0; j < k; ++j) {
      design(i, j) = term;
      term *= xs[i];
    }
    response(i) = ys[i];
    weights(i) = ws[i];
  }

  LocalFit fit;
  fit.coefficients =
      detail::wls_solve(design, response, weights,
                        side == Side::left ? "left side fit" : "right side fit");
  fit.weights = all_weights;
  fit.residuals.resize(data.x.size());
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    fit.residuals(static_cast<Eigen::Index>(i)) =
        data.y[i] - polyval(fit.coefficients, data.x[i]);
  }
  fit.n_effective = n_effective;
  fit.bandwidth_used = bandwidth;
  return fit;
}

double select_bandwidth(const CrossSection& points, const BandwidthSpec& spec,
                        int order, KernelKind kernel) {
  if (spec.kind() == BandwidthSpec::Kind::fixed) {
    return spec.fixed_value();
  }

  SideData sides[2] = {side_points(points, Side::left),
                       side_points(points, Side::right)};
  if (sides[0].x.empty() || sides[1].x.empty()) {
    throw InsufficientDataError(
        std::string(sides[0].x.empty() ? "left" : "right") +
        " side: no observations; bandwidth selection needs both sides");
  }

  if (spec.kind() == BandwidthSpec::Kind::rule_of_thumb) {
    const std::size_t n = points.points.size();
    if (n < 2) {
      throw InsufficientDataError(
          "rule-of-thumb bandwidth needs at least 2 points");
    }
    double mean = 0.0;
    for (const auto& p : points.points) mean += p.distance;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& p : points.points) {
      const double d = p.distance - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double h =
        1.06 * sd * std::pow(static_cast<double>(n), -0.2);
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw NoFeasibleBandwidthError(
          "rule-of-thumb bandwidth is not positive (constant distances?)");
    }
    return h;
  }

  // Leave-one-out CV. Candidates ascend so that ties resolve to the
  // smaller bandwidth regardless of grid order.
  std::vector<double> grid = spec.grid();
  std::sort(grid.begin(), grid.end());

  bool found = false;
  double best_h = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  for (double h : grid) {
    const auto score = loo_cv_score(sides, h, order, kernel);
    if (score && *score < best_score) {
      found = true;
      best_h = h;
      best_score = *score;
    }
  }
  if (!found) {
    throw NoFeasibleBandwidthError(
        "no bandwidth in the CV grid admits a feasible leave-one-out fit on "
        "both sides");
  }
  return best_h;
}

}  // namespace geodid
