#include "geodid/binscatter.hpp"
#include "geodid/dgp.hpp"
#include "geodid/estimators.hpp"
#include "geodid/format.hpp"
#include "geodid/local_regression.hpp"
#include "geodid/panel_data.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace {

using geodid::BandwidthSpec;
using geodid::CrossSection;
using geodid::EstimatorConfig;
using geodid::PanelDataset;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Flat key-value records (text and json-lines output)

using Value = std::variant<double, std::int64_t, std::string>;
using Record = std::vector<std::pair<std::string, Value>>;

void print_record(const Record& record, const std::string& format) {
  if (format == "json-lines") {
    nlohmann::ordered_json j;
    for (const auto& [key, value] : record) {
      if (const double* d = std::get_if<double>(&value)) {
        if (std::isnan(*d)) {
          j[key] = nullptr;
        } else {
          j[key] = *d;
        }
      } else if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) {
        j[key] = *i;
      } else {
        j[key] = std::get<std::string>(value);
      }
    }
    std::cout << j.dump() << '\n';
  } else {
    for (const auto& [key, value] : record) {
      std::cout << key << '=';
      if (const double* d = std::get_if<double>(&value)) {
        std::cout << geodid::format_double(*d);
      } else if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) {
        std::cout << *i;
      } else {
        std::cout << std::get<std::string>(value);
      }
      std::cout << '\n';
    }
  }
}

Record estimate_record(double tau_hat, double se, double ci_lower,
                       double ci_upper, double gamma_hat, double disc_pre,
                       double disc_post, double bandwidth, std::size_t n_left,
                       std::size_t n_right, const std::string& variant) {
  return Record{
      {"tau_hat", tau_hat},
      {"se", se},
      {"ci_lower", ci_lower},
      {"ci_upper", ci_upper},
      {"gamma_hat", gamma_hat},
      {"disc_pre", disc_pre},
      {"disc_post", disc_post},
      {"bandwidth", bandwidth},
      {"n_left", static_cast<std::int64_t>(n_left)},
      {"n_right", static_cast<std::int64_t>(n_right)},
      {"variant", variant},
  };
}

// ---------------------------------------------------------------------------
// Bandwidth resolution

// --bandwidth auto: leave-one-out CV over a geometric grid of 12 candidates
// spanning [range/50, range/2] of the observed distance range.
std::vector<double> auto_grid(double range) {
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw geodid::NoFeasibleBandwidthError(
        "distance range is not positive; cannot build the automatic "
        "bandwidth grid");
  }
  const double lo = range / 50.0;
  const double hi = range / 2.0;
  const int n = 12;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  }
  return grid;
}

BandwidthSpec resolve_bandwidth(const std::string& text, double range) {
  if (text == "auto") {
    return BandwidthSpec::leave_one_out_cv(auto_grid(range));
  }
  return BandwidthSpec::fixed(std::stod(text));
}

double distance_range(const PanelDataset& data) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& obs : data.observations) {
    lo = std::min(lo, obs.distance);
    hi = std::max(hi, obs.distance);
  }
  return hi - lo;
}

// ---------------------------------------------------------------------------
// Shared option blocks

struct EstimatorFlags {
  std::string kernel = "triangular";
  std::string bandwidth = "auto";
  int order = 1;
  double level = 0.95;
};

struct ColumnFlags {
  std::string unit = "unit_id";
  std::string period = "period";
  std::string outcome = "outcome";
  std::string distance = "distance";

  geodid::ColumnMap map() const { return {unit, period, outcome, distance}; }
};

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& flags) {
  cmd->add_option("--kernel", flags.kernel, "Kernel weight function")
      ->check(CLI::IsMember({"uniform", "triangular", "epanechnikov"}))
      ->capture_default_str();
  cmd->add_option(
         "--bandwidth", flags.bandwidth,
         "'auto' (leave-one-out CV over a geometric grid of 12 bandwidths "
         "spanning [range/50, range/2] of the distance range) or a fixed "
         "positive bandwidth")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            if (s == "auto") return {};
            try {
              std::size_t pos = 0;
              const double h = std::stod(s, &pos);
              if (pos == s.size() && h > 0.0 && std::isfinite(h)) return {};
            } catch (...) {
            }
            return "must be 'auto' or a positive number";
          },
          "BANDWIDTH"))
      ->capture_default_str();
  cmd->add_option("--order", flags.order, "Local polynomial order (>= 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--level", flags.level, "Confidence level, strictly in (0,1)")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            try {
              std::size_t pos = 0;
              const double v = std::stod(s, &pos);
              if (pos == s.size() && v > 0.0 && v < 1.0) return {};
            } catch (...) {
            }
            return "must lie strictly inside (0,1)";
          },
          "LEVEL"))
      ->capture_default_str();
}

void add_column_flags(CLI::App* cmd, ColumnFlags& cols) {
  cmd->add_option("--col-unit", cols.unit, "Column holding the unit id")
      ->capture_default_str();
  cmd->add_option("--col-period", cols.period, "Column holding the period")
      ->capture_default_str();
  cmd->add_option("--col-outcome", cols.outcome, "Column holding the outcome")
      ->capture_default_str();
  cmd->add_option("--col-distance", cols.distance,
                  "Column holding the signed distance")
      ->capture_default_str();
}

EstimatorConfig make_config(const EstimatorFlags& flags, double range) {
  EstimatorConfig config{resolve_bandwidth(flags.bandwidth, range)};
  config.kernel = geodid::kernel_from_name(flags.kernel);
  config.order = flags.order;
  config.confidence_level = flags.level;
  return config;
}

PanelDataset load_panel_file(const std::string& path,
                             const geodid::ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) {
    throw geodid::DataError("cannot open input file '" + path + "'");
  }
  return geodid::load_panel(in, columns, path);
}

geodid::DgpSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw geodid::DataError("cannot open spec file '" + path + "'");
  }
  return geodid::parse_dgp_spec(in);
}

// First differences for display purposes; balance has been validated by the
// caller, but empty cutoff sides are allowed (binscatter reports those).
CrossSection diff_cross_section(const PanelDataset& data) {
  const CrossSection y0 = geodid::period_slice(data, 0);
  const CrossSection y1 = geodid::period_slice(data, 1);
  std::unordered_map<std::string, double> base;
  base.reserve(y0.points.size());
  for (const auto& p : y0.points) base.emplace(p.unit_id, p.value);
  CrossSection out;
  out.points.reserve(y1.points.size());
  for (const auto& p : y1.points) {
    out.points.push_back({p.unit_id, p.distance, p.value - base.at(p.unit_id)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct EstimateOptions {
  std::string input;
  std::string estimator;
  int period = 1;
  bool period_given = false;
  EstimatorFlags est;
  ColumnFlags cols;
  std::string output = "text";
};

int run_estimate(const EstimateOptions& opt) {
  if (opt.period_given && opt.estimator != "rd") {
    std::cerr << "error: --period only applies to --estimator rd\n";
    return 2;
  }

  const PanelDataset data = load_panel_file(opt.input, opt.cols.map());
  const EstimatorConfig config = make_config(opt.est, distance_range(data));

  Record record;
  if (opt.estimator == "rd") {
    const CrossSection slice = geodid::period_slice(data, opt.period);
    geodid::require_valid_cross_section(slice);
    const geodid::RdEstimate est = geodid::estimate_sharp_rd(slice, config);
    record = estimate_record(est.tau_hat, est.se, est.ci_lower, est.ci_upper,
                             kNaN, kNaN, kNaN, est.bandwidth_used, est.n_left,
                             est.n_right, "rd");
  } else if (opt.estimator == "diff-disc-fd") {
    const geodid::DiffDiscEstimate est =
        geodid::estimate_diff_disc_fd(data, config);
    record = estimate_record(est.tau_hat, est.se, est.ci_lower, est.ci_upper,
                             est.gamma_hat, est.disc_pre, est.disc_post,
                             est.bandwidth_used, est.n_left, est.n_right,
                             geodid::variant_name(est.variant));
  } else {
    const geodid::PooledEstimate pooled =
        geodid::estimate_diff_disc_pooled_rcs(data, config);
    const geodid::DiffDiscEstimate& est = pooled.estimate;
    record = estimate_record(est.tau_hat, est.se, est.ci_lower, est.ci_upper,
                             est.gamma_hat, est.disc_pre, est.disc_post,
                             est.bandwidth_used, est.n_left, est.n_right,
                             geodid::variant_name(est.variant));
  }
  print_record(record, opt.output);
  return 0;
}

struct SimulateOptions {
  std::string spec_path;
  std::string estimator;
  std::size_t reps = 0;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  EstimatorFlags est;
  std::string output = "text";
};

int run_simulate(const SimulateOptions& opt) {
  const geodid::DgpSpec spec = load_spec_file(opt.spec_path);
  const EstimatorConfig config =
      make_config(opt.est, 2.0 * spec.distance_halfwidth);

  geodid::McEstimator estimator = geodid::McEstimator::naive_rd_post;
  if (opt.estimator == "diff-disc-fd") {
    estimator = geodid::McEstimator::diff_disc_fd;
  } else if (opt.estimator == "diff-disc-pooled") {
    estimator = geodid::McEstimator::diff_disc_pooled;
  }

  const geodid::McSummary summary = geodid::run_monte_carlo(
      spec, estimator, config, opt.reps, opt.seed, opt.threads);

  const Record record{
      {"reps", static_cast<std::int64_t>(summary.reps)},
      {"mean_estimate", summary.mean_estimate},
      {"bias", summary.bias},
      {"sd", summary.sd},
      {"rmse", summary.rmse},
      {"coverage_rate", summary.coverage_rate},
      {"failures", static_cast<std::int64_t>(summary.failures)},
  };
  print_record(record, opt.output);
  return 0;
}

struct BinscatterOptions {
  std::string input;
  std::size_t bins = 0;
  std::string series = "all";
  ColumnFlags cols;
};

int run_binscatter(const BinscatterOptions& opt) {
  const PanelDataset data = load_panel_file(opt.input, opt.cols.map());

  // Empty cutoff sides surface later as an estimation error (exit 4);
  // every other validation failure is a data error (exit 3).
  const geodid::ValidationReport report = geodid::validate_panel(data);
  for (const auto& issue : report.issues) {
    if (issue.severity == geodid::Severity::error &&
        issue.code != geodid::IssueCode::empty_side) {
      throw geodid::ValidationError("panel failed validation", report);
    }
  }

  std::vector<std::pair<geodid::SeriesKind, CrossSection>> series;
  if (opt.series == "period0" || opt.series == "all") {
    series.emplace_back(geodid::SeriesKind::period0,
                        geodid::period_slice(data, 0));
  }
  if (opt.series == "period1" || opt.series == "all") {
    series.emplace_back(geodid::SeriesKind::period1,
                        geodid::period_slice(data, 1));
  }
  if (opt.series == "fd" || opt.series == "all") {
    series.emplace_back(geodid::SeriesKind::first_difference,
                        diff_cross_section(data));
  }

  std::cout << "series,side,bin_center,mean_value,count\n";
  for (const auto& [kind, points] : series) {
    const geodid::BinnedSeries binned =
        geodid::binscatter(points, kind, opt.bins);
    for (const auto& bin : binned.bins) {
      std::cout << geodid::series_name(kind) << ','
                << geodid::side_name(bin.side) << ','
                << geodid::format_double(bin.center) << ','
                << geodid::format_double(bin.mean_value) << ',' << bin.count
                << '\n';
    }
  }
  return 0;
}

struct GenerateOptions {
  std::string spec_path;
  std::uint64_t seed = 42;
  ColumnFlags cols;
};

int run_generate(const GenerateOptions& opt) {
  const geodid::DgpSpec spec = load_spec_file(opt.spec_path);
  const PanelDataset data = geodid::generate_panel(spec, opt.seed);
  geodid::write_panel_csv(data, std::cout, opt.cols.map());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "geodid: sharp RD and difference-in-discontinuities estimation for "
      "geographic panels"};
  app.require_subcommand(1);

  EstimateOptions est_opt;
  CLI::App* estimate =
      app.add_subcommand("estimate", "Estimate on a panel CSV");
  estimate->add_option("--input", est_opt.input, "Panel CSV file")->required();
  estimate
      ->add_option("--estimator", est_opt.estimator,
                   "rd: sharp RD on one period; diff-disc-fd: RD on first "
                   "differences; diff-disc-pooled: pooled interaction form")
      ->check(CLI::IsMember({"rd", "diff-disc-fd", "diff-disc-pooled"}))
      ->required();
  CLI::Option* period_opt =
      estimate
          ->add_option("--period", est_opt.period,
                       "Period for --estimator rd (0 or 1)")
          ->check(CLI::IsMember({0, 1}))
          ->capture_default_str();
  add_estimator_flags(estimate, est_opt.est);
  add_column_flags(estimate, est_opt.cols);
  estimate->add_option("--output", est_opt.output, "Output format")
      ->check(CLI::IsMember({"text", "json-lines"}))
      ->capture_default_str();

  SimulateOptions sim_opt;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo study from a DGP spec file");
  simulate->add_option("--spec", sim_opt.spec_path, "DGP spec file")
      ->required();
  simulate
      ->add_option("--estimator", sim_opt.estimator,
                   "rd (naive post-period RD), diff-disc-fd, diff-disc-pooled")
      ->check(CLI::IsMember({"rd", "diff-disc-fd", "diff-disc-pooled"}))
      ->required();
  simulate->add_option("--reps", sim_opt.reps, "Number of replications (>= 1)")
      ->check(CLI::PositiveNumber)
      ->required();
  simulate->add_option("--seed", sim_opt.seed, "Master seed")
      ->capture_default_str();
  simulate
      ->add_option("--threads", sim_opt.threads,
                   "Worker threads (0 = hardware count); results do not "
                   "depend on this")
      ->capture_default_str();
  add_estimator_flags(simulate, sim_opt.est);
  simulate->add_option("--output", sim_opt.output, "Output format")
      ->check(CLI::IsMember({"text", "json-lines"}))
      ->capture_default_str();

  BinscatterOptions bin_opt;
  CLI::App* binscatter = app.add_subcommand(
      "binscatter", "Export binned means per side of the cutoff as CSV");
  binscatter->add_option("--input", bin_opt.input, "Panel CSV file")
      ->required();
  binscatter
      ->add_option("--bins", bin_opt.bins, "Equal-width bins per side (>= 2)")
      ->check(CLI::Range(static_cast<std::size_t>(2),
                         std::numeric_limits<std::size_t>::max()))
      ->required();
  binscatter->add_option("--series", bin_opt.series, "Which series to export")
      ->check(CLI::IsMember({"period0", "period1", "fd", "all"}))
      ->capture_default_str();
  add_column_flags(binscatter, bin_opt.cols);

  GenerateOptions gen_opt;
  CLI::App* generate = app.add_subcommand(
      "generate", "Draw a synthetic panel from a DGP spec and print it as CSV");
  generate->add_option("--spec", gen_opt.spec_path, "DGP spec file")
      ->required();
  generate->add_option("--seed", gen_opt.seed, "Seed")->capture_default_str();
  add_column_flags(generate, gen_opt.cols);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n'
              << "run 'geodid --help' (or 'geodid <subcommand> --help') for "
                 "usage\n";
    return 2;
  }
  est_opt.period_given = period_opt->count() > 0;

  try {
    if (estimate->parsed()) return run_estimate(est_opt);
    if (simulate->parsed()) return run_simulate(sim_opt);
    if (binscatter->parsed()) return run_binscatter(bin_opt);
    if (generate->parsed()) return run_generate(gen_opt);
  } catch (const geodid::ValidationError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    for (const auto& issue : e.report().issues) {
      if (issue.severity == geodid::Severity::error) {
        std::cerr << "  " << issue.message << '\n';
      }
    }
    return 3;
  } catch (const geodid::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const geodid::EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
