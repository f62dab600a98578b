#pragma once

#include "geodid/estimators.hpp"
#include "geodid/panel_data.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace geodid {

//! Which continuity assumption a simulated violation breaks. Both add the
//! same step, shift * 1(D >= 0), to period-1 outcomes; the label records
//! whether the shift is read as post-period sorting (a discontinuity in the
//! error's conditional mean) or as another policy turning on (a
//! discontinuity in the period-1 location component).
enum class ViolationKind { none, period1_sorting, period1_policy };

const char* violation_name(ViolationKind kind);
ViolationKind violation_from_name(std::string_view name);

//! Full specification of the synthetic panel data generating process
//!   y_it = f_t(D) + gamma(D) 1(D>=0) + tau(D) 1(D>=0) 1(t=1) + eta_i + u_it
//! with gamma(D) = gamma0 + gamma_slope * D, tau(D) = tau0 + tau_slope * D,
//! distances uniform on (-a, a), unit effect eta_i ~ N(0, unit_effect_sd^2)
//! entering both periods (time-invariant sorting), and independent noise
//! u_it ~ N(0, noise_sd^2).
struct DgpSpec {
  std::size_t n_units = 2000;
  double distance_halfwidth = 1.0;          // a in uniform(-a, a)
  std::vector<double> f0_coeffs{0.0, 1.0};  // f_t(D) = sum_k c_k D^k
  std::vector<double> f1_coeffs{0.0, 1.0};
  double gamma0 = 2.0;
  double gamma_slope = 0.0;
  double tau0 = 1.5;
  double tau_slope = 0.0;
  double noise_sd = 1.0;
  double unit_effect_sd = 1.0;
  ViolationKind violation = ViolationKind::none;
  double violation_shift = 0.0;
};

//! Throws DomainError when the spec is unusable (n_units < 2, negative
//! standard deviations, non-finite parameters, ...).
void validate_dgp(const DgpSpec& spec);

//! Mean outcome at a given distance and period: the model above without the
//! noise terms. This is the single place the outcome equation is assembled.
double dgp_mean_outcome(const DgpSpec& spec, double distance, int period);

//! Draws a balanced two-period panel from the spec. Identical (spec, seed)
//! pairs produce bit-identical datasets. Distances are redrawn as a block in
//! the rare event that one side of the cutoff comes up empty, so generated
//! panels always pass validate_panel.
PanelDataset generate_panel(const DgpSpec& spec, std::uint64_t seed);

//! The estimand: tau(0) = tau0. The slope is irrelevant at the cutoff.
double oracle_true_effect(const DgpSpec& spec);

enum class McEstimator { naive_rd_post, diff_disc_fd, diff_disc_pooled };

//! Monte Carlo aggregates. `reps` counts the replications that produced an
//! estimate and entered the aggregates; replications that ended in an
//! estimator error are tallied in `failures` instead, so
//! rmse^2 = bias^2 + sd^2 * (reps-1)/reps holds exactly.
struct McSummary {
  std::size_t reps = 0;
  double mean_estimate = 0.0;
  double bias = 0.0;           // mean_estimate - tau(0)
  double sd = 0.0;             // sample sd across replications
  double rmse = 0.0;
  double coverage_rate = 0.0;  // fraction of CIs containing tau(0)
  std::size_t failures = 0;
};

//! Deterministic per-replication seed: a hash of (master_seed, r), so
//! replication r's data does not depend on whether other replications ran.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t r);

//! Runs `reps` independent replications: generate a panel, estimate, and
//! aggregate. Replications may run on several threads; results are
//! identical for any thread count because each replication is a pure
//! function of (spec, master_seed, r) and aggregation follows replication
//! order. threads == 0 picks a hardware-based count. Throws HarnessError,
//! carrying the first failure, when every replication fails.
McSummary run_monte_carlo(const DgpSpec& spec, McEstimator estimator,
                          const EstimatorConfig& config, std::size_t reps,
                          std::uint64_t master_seed, unsigned threads = 1);

//! Reads a DgpSpec from a flat key-value file (`key = value` lines, `#`
//! comments; coefficient lists comma-separated). Unknown keys are rejected.
DgpSpec parse_dgp_spec(std::istream& in);

//! Writes every field in the key-value format understood by parse_dgp_spec.
void write_dgp_spec(const DgpSpec& spec, std::ostream& out);

}  // namespace geodid
