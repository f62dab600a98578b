#pragma once

#include "geodid/errors.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace geodid {

//! One unit-period outcome together with the unit's signed distance to the
//! border. Positive distance (including exactly 0) is the treated side.
struct Observation {
  std::string unit_id;
  int period = 0;  // 0 = pre-treatment, 1 = post-treatment
  double outcome = 0.0;
  double distance = 0.0;
};

//! Column names used when reading or writing the CSV schema.
struct ColumnMap {
  std::string unit = "unit_id";
  std::string period = "period";
  std::string outcome = "outcome";
  std::string distance = "distance";
};

struct PanelMetadata {
  std::string source;
  ColumnMap columns;
  std::string note;  // free-form, e.g. the simulator's violation label
};

//! A two-period panel. Balance and the other dataset invariants are checked
//! by validate_panel rather than enforced on construction, so that problems
//! can be reported in full instead of failing at the first bad row.
//!
//! All types in this module are immutable after construction in the sense
//! that no operation mutates its input; they are safe to share across
//! concurrent readers.
struct PanelDataset {
  std::vector<Observation> observations;
  PanelMetadata metadata;
};

//! Per-unit (distance, value) pair: one period's outcome or a first
//! difference, depending on provenance.
struct CrossPoint {
  std::string unit_id;
  double distance = 0.0;
  double value = 0.0;
};

struct CrossSection {
  std::vector<CrossPoint> points;
};

enum class Severity { warning, error };

enum class IssueCode {
  unbalanced_unit,        // unit not present exactly once per period
  duplicate_observation,  // repeated (unit, period) row
  distance_drift,         // distance changes between a unit's two periods
  non_finite_value,       // NaN or infinite outcome/distance
  invalid_period,         // period outside {0, 1} on a hand-built dataset
  empty_side,             // a period has no units on one side of the cutoff
  at_cutoff,              // warning: unit sits exactly at D = 0 (treated side)
};

struct ValidationIssue {
  Severity severity = Severity::error;
  IssueCode code = IssueCode::unbalanced_unit;
  std::string unit_id;  // empty for dataset-level issues
  std::string message;
};

struct SideCounts {
  std::size_t n_left = 0;
  std::size_t n_right = 0;
};

struct ValidationReport {
  bool is_valid = false;  // true iff no issue has Severity::error
  std::vector<ValidationIssue> issues;
  std::size_t n_units = 0;
  std::array<SideCounts, 2> per_period{};  // indexed by period

  bool has_error(IssueCode code) const;
};

//! Thrown when an operation requires a valid panel; carries the report that
//! failed so callers can show the underlying issues.
class ValidationError : public DataError {
public:
  ValidationError(const std::string& what, ValidationReport report);
  const ValidationReport& report() const { return report_; }

private:
  ValidationReport report_;
};

//! Reads the CSV panel schema from a stream. The first line must be a header
//! containing every mapped column; extra columns are ignored. Decimal point
//! and scientific notation are accepted; rows are kept in file order.
//!
//! Throws SchemaError when a mapped column is missing, ParseError when a
//! cell does not parse (the message cites the 1-based data row), and
//! DomainError when a period value is outside {0, 1}.
PanelDataset load_panel(std::istream& in, const ColumnMap& columns = {},
                        std::string source = {});

//! Writes the panel back to the CSV schema. Numeric values use the shortest
//! representation that round-trips, so load_panel(write_panel_csv(x))
//! reproduces every value exactly.
void write_panel_csv(const PanelDataset& data, std::ostream& out,
                     const ColumnMap& columns = {});

//! Checks every dataset invariant (balanced two-period units, stable
//! distances, finite values, both sides of the cutoff populated in each
//! period) and reports all violations. Never throws; violations are
//! reported, not raised. Units exactly at the cutoff produce a warning:
//! they count as treated, matching the D >= 0 convention.
ValidationReport validate_panel(const PanelDataset& data);

//! One point per unit with value = y(period 1) - y(period 0) at the unit's
//! distance. Requires validate_panel(data).is_valid; otherwise throws
//! ValidationError carrying the report.
CrossSection first_difference(const PanelDataset& data);

//! One point per unit with the given period's outcome. Throws DomainError
//! unless period is 0 or 1.
CrossSection period_slice(const PanelDataset& data, int period);

//! Enforces the CrossSection invariants (unique unit ids, finite values);
//! throws DataError on violation.
void require_valid_cross_section(const CrossSection& points);

namespace detail {

//! Validation without the balance and distance-drift checks, for data that
//! is a pair of repeated cross-sections rather than a panel.
ValidationReport validate_repeated_cross_sections(const PanelDataset& data);

}  // namespace detail

}  // namespace geodid
