#include "geodid/panel_data.hpp"

#include "geodid/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace geodid {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

bool parse_double_token(std::string_view token, double& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

bool parse_int_token(std::string_view token, long& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

std::size_t find_column(const std::vector<std::string_view>& header,
                        const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw SchemaError("missing column '" + name + "' in header");
}

}  // namespace

bool ValidationReport::has_error(IssueCode code) const {
  return std::any_of(issues.begin(), issues.end(), [&](const auto& issue) {
    return issue.severity == Severity::error && issue.code == code;
  });
}

ValidationError::ValidationError(const std::string& what,
                                 ValidationReport report)
    : DataError(what), report_(std::move(report)) {}

PanelDataset load_panel(std::istream& in, const ColumnMap& columns,
                        std::string source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("empty input: missing header row");
  }

  const auto header = split_fields(line);
  const std::size_t col_unit = find_column(header, columns.unit);
  const std::size_t col_period = find_column(header, columns.period);
  const std::size_t col_outcome = find_column(header, columns.outcome);
  const std::size_t col_distance = find_column(header, columns.distance);
  const std::size_t need =
      std::max({col_unit, col_period, col_outcome, col_distance}) + 1;

  PanelDataset data;
  data.metadata.source = std::move(source);
  data.metadata.columns = columns;

  std::size_t row = 0;  // 1-based data row, header excluded
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    const std::string row_label = "row " + std::to_string(row);
    if (fields.size() < need) {
      throw ParseError(row_label + ": expected at least " +
                       std::to_string(need) + " columns, found " +
                       std::to_string(fields.size()));
    }

    Observation obs;
    obs.unit_id = std::string(fields[col_unit]);
    if (obs.unit_id.empty()) {
      throw ParseError(row_label + ": empty value in column '" + columns.unit +
                       "'");
    }

    long period = 0;
    if (!parse_int_token(fields[col_period], period)) {
      throw ParseError(row_label + ": value '" +
                       std::string(fields[col_period]) + "' in column '" +
                       columns.period + "' is not an integer");
    }
    if (period != 0 && period != 1) {
      throw DomainError(row_label + ": period " + std::to_string(period) +
                        " outside {0,1}");
    }
    obs.period = static_cast<int>(period);

    if (!parse_double_token(fields[col_outcome], obs.outcome)) {
      throw ParseError(row_label + ": value '" +
                       std::string(fields[col_outcome]) + "' in column '" +
                       columns.outcome + "' is not numeric");
    }
    if (!parse_double_token(fields[col_distance], obs.distance)) {
      throw ParseError(row_label + ": value '" +
                       std::string(fields[col_distance]) + "' in column '" +
                       columns.distance + "' is not numeric");
    }
    data.observations.push_back(std::move(obs));
  }
  return data;
}

void write_panel_csv(const PanelDataset& data, std::ostream& out,
                     const ColumnMap& columns) {
  out << columns.unit << ',' << columns.period << ',' << columns.outcome << ','
      << columns.distance << '\n';
  for (const auto& obs : data.observations) {
    out << obs.unit_id << ',' << obs.period << ',' << format_double(obs.outcome)
        << ',' << format_double(obs.distance) << '\n';
  }
}

namespace {

struct UnitInfo {
  int count[2] = {0, 0};
  double distance[2] = {0.0, 0.0};
  bool cutoff_flagged = false;
};

// Shared by validate_panel and the repeated-cross-section entry path of the
// pooled estimator: balance and distance-drift checks only apply to panels.
ValidationReport validate_impl(const PanelDataset& data, bool require_balance) {
  ValidationReport report;
  std::vector<std::string> order;
  std::unordered_map<std::string, UnitInfo> units;
  units.reserve(data.observations.size() / 2 + 1);

  const auto add = [&](Severity severity, IssueCode code,
                       const std::string& unit, std::string message) {
    report.issues.push_back({severity, code, unit, std::move(message)});
  };

  for (const auto& obs : data.observations) {
    const bool finite_outcome = std::isfinite(obs.outcome);
    const bool finite_distance = std::isfinite(obs.distance);
    if (!finite_outcome) {
      add(Severity::error, IssueCode::non_finite_value, obs.unit_id,
          "unit " + obs.unit_id + ": non-finite outcome in period " +
              std::to_string(obs.period));
    }
    if (!finite_distance) {
      add(Severity::error, IssueCode::non_finite_value, obs.unit_id,
          "unit " + obs.unit_id + ": non-finite distance in period " +
              std::to_string(obs.period));
    }
    if (obs.period != 0 && obs.period != 1) {
      add(Severity::error, IssueCode::invalid_period, obs.unit_id,
          "unit " + obs.unit_id + ": period " + std::to_string(obs.period) +
              " outside {0,1}");
      continue;
    }

    auto [it, inserted] = units.try_emplace(obs.unit_id);
    if (inserted) order.push_back(obs.unit_id);
    UnitInfo& info = it->second;
    if (info.count[obs.period] > 0) {
      add(Severity::error, IssueCode::duplicate_observation, obs.unit_id,
          "unit " + obs.unit_id + ": duplicate observation for period " +
              std::to_string(obs.period));
    } else {
      info.distance[obs.period] = obs.distance;
    }
    ++info.count[obs.period];

    if (finite_distance) {
      SideCounts& counts = report.per_period[obs.period];
      if (obs.distance < 0.0) {
        ++counts.n_left;
      } else {
        ++counts.n_right;
      }
      if (obs.distance == 0.0 && !info.cutoff_flagged) {
        info.cutoff_flagged = true;
        add(Severity::warning, IssueCode::at_cutoff, obs.unit_id,
            "unit " + obs.unit_id +
                ": distance exactly at the cutoff; counted as treated");
      }
    }
  }

  for (const auto& unit : order) {
    const UnitInfo& info = units.at(unit);
    if (!require_balance) continue;
    if (info.count[0] == 0 || info.count[1] == 0) {
      const int present = info.count[0] > 0 ? 0 : 1;
      add(Severity::error, IssueCode::unbalanced_unit, unit,
          "unit " + unit + ": present in period " + std::to_string(present) +
              " only");
    } else if (std::isfinite(info.distance[0]) &&
               std::isfinite(info.distance[1]) &&
               info.distance[0] != info.distance[1]) {
      add(Severity::error, IssueCode::distance_drift, unit,
          "unit " + unit + ": distance drifts between periods (" +
              format_double(info.distance[0]) + " vs " +
              format_double(info.distance[1]) + ")");
    }
  }

  for (int period = 0; period < 2; ++period) {
    const SideCounts& counts = report.per_period[period];
    if (counts.n_left == 0) {
      add(Severity::error, IssueCode::empty_side, {},
          "period " + std::to_string(period) +
              ": no units on the left side of the cutoff");
    }
    if (counts.n_right == 0) {
      add(Severity::error, IssueCode::empty_side, {},
          "period " + std::to_string(period) +
              ": no units on the right side of the cutoff");
    }
  }

  report.n_units = order.size();
  report.is_valid =
      std::none_of(report.issues.begin(), report.issues.end(),
                   [](const auto& i) { return i.severity == Severity::error; });
  return report;
}

}  // namespace

ValidationReport validate_panel(const PanelDataset& data) {
  return validate_impl(data, /*require_balance=*/true);
}

namespace detail {

ValidationReport validate_repeated_cross_sections(const PanelDataset& data) {
  return validate_impl(data, /*require_balance=*/false);
}

}  // namespace detail

CrossSection first_difference(const PanelDataset& data) {
  ValidationReport report = validate_panel(data);
  if (!report.is_valid) {
    throw ValidationError(
        "panel failed validation; first differences require a balanced panel",
        std::move(report));
  }

  struct Pair {
    double outcome[2] = {0.0, 0.0};
    double distance = 0.0;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Pair> by_unit;
  by_unit.reserve(data.observations.size() / 2 + 1);
  for (const auto& obs : data.observations) {
    auto [it, inserted] = by_unit.try_emplace(obs.unit_id);
    if (inserted) {
      order.push_back(obs.unit_id);
      it->second.distance = obs.distance;
    }
    it->second.outcome[obs.period] = obs.outcome;
  }

  CrossSection out;
  out.points.reserve(order.size());
  for (const auto& unit : order) {
    const Pair& p = by_unit.at(unit);
    out.points.push_back({unit, p.distance, p.outcome[1] - p.outcome[0]});
  }
  return out;
}

CrossSection period_slice(const PanelDataset& data, int period) {
  if (period != 0 && period != 1) {
    throw DomainError("period must be 0 or 1, got " + std::to_string(period));
  }
  CrossSection out;
  for (const auto& obs : data.observations) {
    if (obs.period == period) {
      out.points.push_back({obs.unit_id, obs.distance, obs.outcome});
    }
  }
  return out;
}

void require_valid_cross_section(const CrossSection& points) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(points.points.size());
  for (const auto& p : points.points) {
    if (!seen.insert(p.unit_id).second) {
      throw DataError("duplicate unit '" + p.unit_id + "' in cross-section");
    }
    if (!std::isfinite(p.value) || !std::isfinite(p.distance)) {
      throw DataError("unit '" + p.unit_id +
                      "': non-finite value or distance in cross-section");
    }
  }
}

}  // namespace geodid
