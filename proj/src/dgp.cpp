#include "geodid/dgp.hpp"

#include "geodid/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace geodid {

namespace {

double polyval(const std::vector<double>& coeffs, double x) {
  double value = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    value = value * x + *it;
  }
  return value;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double c) { return std::isfinite(c); });
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string unit_label(std::size_t index) {
  std::string digits = std::to_string(index + 1);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "u" + digits;
}

struct RepResult {
  double tau = 0.0;
  bool ok = false;
  bool covered = false;
  std::string error;
};

}  // namespace

const char* violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::none:
      return "none";
    case ViolationKind::period1_sorting:
      return "period1_sorting";
    case ViolationKind::period1_policy:
      return "period1_policy";
  }
  return "unknown";
}

ViolationKind violation_from_name(std::string_view name) {
  if (name == "none") return ViolationKind::none;
  if (name == "period1_sorting") return ViolationKind::period1_sorting;
  if (name == "period1_policy") return ViolationKind::period1_policy;
  throw DomainError("unknown violation '" + std::string(name) + "'");
}

void validate_dgp(const DgpSpec& spec) {
  if (spec.n_units < 2) {
    throw DomainError("n_units must be at least 2");
  }
  if (!(spec.distance_halfwidth > 0.0) ||
      !std::isfinite(spec.distance_halfwidth)) {
    throw DomainError("distance_halfwidth must be a positive finite number");
  }
  if (!all_finite(spec.f0_coeffs) || !all_finite(spec.f1_coeffs)) {
    throw DomainError("polynomial coefficients must be finite");
  }
  if (!std::isfinite(spec.gamma0) || !std::isfinite(spec.gamma_slope) ||
      !std::isfinite(spec.tau0) || !std::isfinite(spec.tau_slope)) {
    throw DomainError("gamma/tau parameters must be finite");
  }
  if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd)) {
    throw DomainError("noise_sd must be a nonnegative finite number");
  }
  if (!(spec.unit_effect_sd >= 0.0) || !std::isfinite(spec.unit_effect_sd)) {
    throw DomainError("unit_effect_sd must be a nonnegative finite number");
  }
  if (!std::isfinite(spec.violation_shift)) {
    throw DomainError("violation_shift must be finite");
  }
}

double dgp_mean_outcome(const DgpSpec& spec, double distance, int period) {
  if (period != 0 && period != 1) {
    throw DomainError("period must be 0 or 1, got " + std::to_string(period));
  }
  double value =
      polyval(period == 0 ? spec.f0_coeffs : spec.f1_coeffs, distance);
  if (distance >= 0.0) {
    value += spec.gamma0 + spec.gamma_slope * distance;
    if (period == 1) {
      value += spec.tau0 + spec.tau_slope * distance;
      if (spec.violation != ViolationKind::none) {
        value += spec.violation_shift;
      }
    }
  }
  return value;
}

PanelDataset generate_panel(const DgpSpec& spec, std::uint64_t seed) {
  validate_dgp(spec);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> distance_law(
      -spec.distance_halfwidth, spec.distance_halfwidth);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Redraw the whole distance block on the (vanishingly rare) event that a
  // side comes up empty, so every generated panel passes validation.
  std::vector<double> distances(spec.n_units);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    bool left = false;
    bool right = false;
    for (auto& d : distances) {
      d = distance_law(rng);
      left = left || d < 0.0;
      right = right || d >= 0.0;
    }
    if (left && right) break;
    if (attempt == 999) {
      throw DomainError(
          "distance law failed to populate both sides of the cutoff");
    }
  }

  PanelDataset data;
  data.observations.reserve(2 * spec.n_units);
  data.metadata.source = "dgp-simulator seed=" + std::to_string(seed);
  data.metadata.note = std::string("violation=") +
                       violation_name(spec.violation) +
                       (spec.violation == ViolationKind::none
                            ? ""
                            : " shift=" + format_double(spec.violation_shift));

  for (std::size_t i = 0; i < spec.n_units; ++i) {
    const double d = distances[i];
    const double eta = spec.unit_effect_sd * gauss(rng);
    const double u0 = spec.noise_sd * gauss(rng);
    const double u1 = spec.noise_sd * gauss(rng);
    const std::string id = unit_label(i);
    data.observations.push_back(
        {id, 0, dgp_mean_outcome(spec, d, 0) + eta + u0, d});
    data.observations.push_back(
        {id, 1, dgp_mean_outcome(spec, d, 1) + eta + u1, d});
  }
  return data;
}

double oracle_true_effect(const DgpSpec& spec) { return spec.tau0; }

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t r) {
  return splitmix64(splitmix64(master_seed) ^ (r + 0x632BE59BD9B4E019ull));
}

McSummary run_monte_carlo(const DgpSpec& spec, McEstimator estimator,
                          const EstimatorConfig& config, std::size_t reps,
                          std::uint64_t master_seed, unsigned threads) {
  if (reps < 1) {
    throw DomainError("reps must be at least 1");
  }
  validate_dgp(spec);
  const double tau0 = oracle_true_effect(spec);

  std::vector<RepResult> results(reps);
  const auto run_one = [&](std::size_t r) {
    RepResult& out = results[r];
    try {
      const PanelDataset data =
          generate_panel(spec, replication_seed(master_seed, r));
      double tau = 0.0;
      double lo = 0.0;
      double hi = 0.0;
      switch (estimator) {
        case McEstimator::naive_rd_post: {
          const RdEstimate est =
              estimate_sharp_rd(period_slice(data, 1), config);
          tau = est.tau_hat;
          lo = est.ci_lower;
          hi = est.ci_upper;
          break;
        }
        case McEstimator::diff_disc_fd: {
          const DiffDiscEstimate est = estimate_diff_disc_fd(data, config);
          tau = est.tau_hat;
          lo = est.ci_lower;
          hi = est.ci_upper;
          break;
        }
        case McEstimator::diff_disc_pooled: {
          const PooledEstimate est = estimate_diff_disc_pooled(data, config);
          tau = est.estimate.tau_hat;
          lo = est.estimate.ci_lower;
          hi = est.estimate.ci_upper;
          break;
        }
      }
      out.tau = tau;
      out.covered = lo <= tau0 && tau0 <= hi;
      out.ok = true;
    } catch (const Error& e) {
      out.error = e.what();
    }
  };

  unsigned n_threads = threads == 0
                           ? std::max(1u, std::thread::hardware_concurrency())
                           : threads;
  n_threads = std::min(n_threads, 8u);
  if (reps < n_threads) n_threads = static_cast<unsigned>(reps);

  if (n_threads <= 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  } else {
    // Each replication is a pure function of (spec, master_seed, r) and
    // writes only its own slot, so the partition cannot affect results.
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    const std::size_t chunk = (reps + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(reps, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t r = lo; r < hi; ++r) run_one(r);
      });
    }
    for (auto& worker : pool) worker.join();
  }

  std::size_t successes = 0;
  std::size_t covered = 0;
  double mean = 0.0;
  for (const auto& rep : results) {
    if (!rep.ok) continue;
    ++successes;
    mean += rep.tau;
    if (rep.covered) ++covered;
  }
  if (successes == 0) {
    const auto first = std::find_if(results.begin(), results.end(),
                                    [](const auto& r) { return !r.ok; });
    throw HarnessError("all " + std::to_string(reps) +
                       " replications failed; first failure: " + first->error);
  }
  mean /= static_cast<double>(successes);

  double ss_mean = 0.0;
  double ss_true = 0.0;
  for (const auto& rep : results) {
    if (!rep.ok) continue;
    ss_mean += (rep.tau - mean) * (rep.tau - mean);
    ss_true += (rep.tau - tau0) * (rep.tau - tau0);
  }

  McSummary summary;
  summary.reps = successes;
  summary.failures = reps - successes;
  summary.mean_estimate = mean;
  summary.bias = mean - tau0;
  summary.sd = successes > 1
                   ? std::sqrt(ss_mean / static_cast<double>(successes - 1))
                   : 0.0;
  summary.rmse = std::sqrt(ss_true / static_cast<double>(successes));
  summary.coverage_rate =
      static_cast<double>(covered) / static_cast<double>(successes);
  return summary;
}

namespace {

std::string_view trim_view(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

double parse_spec_double(std::string_view key, std::string_view token) {
  double out = 0.0;
  const char* last = token.data() + token.size();
  auto res = std::from_chars(token.data(), last, out);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw DomainError("spec key '" + std::string(key) + "': value '" +
                      std::string(token) + "' is not numeric");
  }
  return out;
}

std::vector<double> parse_coeff_list(std::string_view key,
                                     std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  if (trim_view(text).empty()) return out;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string_view token =
        trim_view(comma == std::string_view::npos
                      ? text.substr(start)
                      : text.substr(start, comma - start));
    out.push_back(parse_spec_double(key, token));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join_coeffs(const std::vector<double>& coeffs) {
  std::string out;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(coeffs[i]);
  }
  return out;
}

}  // namespace

DgpSpec parse_dgp_spec(std::istream& in) {
  DgpSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim_view(line);
    if (view.empty() || view.front() == '#') continue;
    const std::size_t eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw DomainError("spec line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string_view key = trim_view(view.substr(0, eq));
    const std::string_view value = trim_view(view.substr(eq + 1));

    if (key == "n_units") {
      const double n = parse_spec_double(key, value);
      if (n < 0 || n != std::floor(n)) {
        throw DomainError("n_units must be a nonnegative integer");
      }
      spec.n_units = static_cast<std::size_t>(n);
    } else if (key == "distance_halfwidth") {
      spec.distance_halfwidth = parse_spec_double(key, value);
    } else if (key == "f0_coeffs") {
      spec.f0_coeffs = parse_coeff_list(key, value);
    } else if (key == "f1_coeffs") {
      spec.f1_coeffs = parse_coeff_list(key, value);
    } else if (key == "gamma0") {
      spec.gamma0 = parse_spec_double(key, value);
    } else if (key == "gamma_slope") {
      spec.gamma_slope = parse_spec_double(key, value);
    } else if (key == "tau0") {
      spec.tau0 = parse_spec_double(key, value);
    } else if (key == "tau_slope") {
      spec.tau_slope = parse_spec_double(key, value);
    } else if (key == "noise_sd") {
      spec.noise_sd = parse_spec_double(key, value);
    } else if (key == "unit_effect_sd") {
      spec.unit_effect_sd = parse_spec_double(key, value);
    } else if (key == "violation") {
      spec.violation = violation_from_name(value);
    } else if (key == "violation_shift") {
      spec.violation_shift = parse_spec_double(key, value);
    } else {
      throw DomainError("unknown spec key '" + std::string(key) + "'");
    }
  }
  return spec;
}

void write_dgp_spec(const DgpSpec& spec, std::ostream& out) {
  out << "n_units = " << spec.n_units << '\n'
      << "distance_halfwidth = " << format_double(spec.distance_halfwidth)
      << '\n'
      << "f0_coeffs = " << join_coeffs(spec.f0_coeffs) << '\n'
      << "f1_coeffs = " << join_coeffs(spec.f1_coeffs) << '\n'
      << "gamma0 = " << format_double(spec.gamma0) << '\n'
      << "gamma_slope = " << format_double(spec.gamma_slope) << '\n'
      << "tau0 = " << format_double(spec.tau0) << '\n'
      << "tau_slope = " << format_double(spec.tau_slope) << '\n'
      << "noise_sd = " << format_double(spec.noise_sd) << '\n'
      << "unit_effect_sd = " << format_double(spec.unit_effect_sd) << '\n'
      << "violation = " << violation_name(spec.violation) << '\n'
      << "violation_shift = " << format_double(spec.violation_shift) << '\n';
}

}  // namespace geodid
