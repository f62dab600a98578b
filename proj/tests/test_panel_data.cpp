#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "geodid/panel_data.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "test_util.hpp"

using namespace geodid;

namespace {

PanelDataset load_from_string(const std::string& text,
                              const ColumnMap& columns = {}) {
  std::istringstream in(text);
  return load_panel(in, columns, "inline");
}

}  // namespace

TEST_CASE("load_panel parses a small valid file") {
  const auto data = load_from_string(
      "unit_id,period,outcome,distance\n"
      "a,0,1.0,-0.5\n"
      "a,1,2.5,-0.5\n"
      "b,0,3.0,0.25\n"
      "b,1,3.25,0.25\n");
  REQUIRE(data.observations.size() == 4);
  CHECK(data.observations[0].unit_id == "a");
  CHECK(data.observations[0].period == 0);
  CHECK(data.observations[0].outcome == 1.0);
  CHECK(data.observations[0].distance == -0.5);
  CHECK(data.observations[3].unit_id == "b");
  CHECK(data.observations[3].period == 1);
  // rows keep file order
  CHECK(data.observations[1].outcome == 2.5);
}

TEST_CASE("load_panel accepts scientific notation and column remapping") {
  ColumnMap columns;
  columns.unit = "id";
  columns.period = "t";
  columns.outcome = "y";
  columns.distance = "d";
  const auto data = load_from_string(
      "id,extra,t,y,d\n"
      "x,ignored,0,1e-3,-2.5e-1\n"
      "x,ignored,1,2E2,-2.5e-1\n",
      columns);
  REQUIRE(data.observations.size() == 2);
  CHECK(data.observations[0].outcome == 1e-3);
  CHECK(data.observations[0].distance == -0.25);
  CHECK(data.observations[1].outcome == 200.0);
}

TEST_CASE("load_panel reports a missing column by name") {
  CHECK_THROWS_WITH_AS(
      load_from_string("unit_id,period,outcome\na,0,1.0\n"),
      doctest::Contains("distance"), SchemaError);
}

TEST_CASE("load_panel reports bad period values with the row number") {
  const std::string text =
      "unit_id,period,outcome,distance\n"
      "a,0,1.0,-0.5\n"
      "a,1,2.0,-0.5\n"
      "b,2,3.0,0.5\n";
  CHECK_THROWS_WITH_AS(load_from_string(text), doctest::Contains("row 3"),
                       DomainError);
}

TEST_CASE("load_panel reports non-numeric cells with the row number") {
  const std::string text =
      "unit_id,period,outcome,distance\n"
      "a,0,oops,-0.5\n";
  CHECK_THROWS_WITH_AS(load_from_string(text), doctest::Contains("row 1"),
                       ParseError);
  const std::string text2 =
      "unit_id,period,outcome,distance\n"
      "a,0,1.0,-0.5\n"
      "a,1,1.0,zzz\n";
  CHECK_THROWS_WITH_AS(load_from_string(text2), doctest::Contains("row 2"),
                       ParseError);
}

TEST_CASE("validate_panel accepts a balanced panel and counts sides") {
  const auto data = testutil::make_panel({-0.5, 0.25}, {1.0, 2.0}, {1.5, 2.5});
  const auto report = validate_panel(data);
  CHECK(report.is_valid);
  CHECK(report.n_units == 2);
  CHECK(report.per_period[0].n_left == 1);
  CHECK(report.per_period[0].n_right == 1);
  CHECK(report.per_period[1].n_left == 1);
  CHECK(report.per_period[1].n_right == 1);
}

TEST_CASE("validate_panel flags an unbalanced unit") {
  PanelDataset data = testutil::make_panel({-0.5, 0.25}, {1.0, 2.0}, {1.5, 2.5});
  data.observations.push_back({"A", 0, 4.0, -0.1});
  const auto report = validate_panel(data);
  CHECK_FALSE(report.is_valid);
  CHECK(report.has_error(IssueCode::unbalanced_unit));
  bool found = false;
  for (const auto& issue : report.issues) {
    if (issue.code == IssueCode::unbalanced_unit && issue.unit_id == "A") {
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("validate_panel flags distance drift within a unit") {
  PanelDataset data;
  data.observations.push_back({"B", 0, 1.0, 3.0});
  data.observations.push_back({"B", 1, 2.0, 3.1});
  data.observations.push_back({"C", 0, 1.0, -1.0});
  data.observations.push_back({"C", 1, 2.0, -1.0});
  const auto report = validate_panel(data);
  CHECK_FALSE(report.is_valid);
  CHECK(report.has_error(IssueCode::distance_drift));
}

TEST_CASE("validate_panel flags duplicates, non-finite values, empty sides") {
  PanelDataset data;
  data.observations.push_back({"a", 0, 1.0, 0.5});
  data.observations.push_back({"a", 0, 1.5, 0.5});  // duplicate (a, 0)
  data.observations.push_back({"a", 1, 2.0, 0.5});
  data.observations.push_back({"b", 0, std::nan(""), 0.7});
  data.observations.push_back({"b", 1, 2.0, 0.7});
  const auto report = validate_panel(data);
  CHECK_FALSE(report.is_valid);
  CHECK(report.has_error(IssueCode::duplicate_observation));
  CHECK(report.has_error(IssueCode::non_finite_value));
  CHECK(report.has_error(IssueCode::empty_side));  // no left-side units
}

TEST_CASE("validate_panel warns about units exactly at the cutoff") {
  const auto data = testutil::make_panel({-0.5, 0.0}, {1.0, 2.0}, {1.5, 2.5});
  const auto report = validate_panel(data);
  CHECK(report.is_valid);  // warning only
  bool warned = false;
  for (const auto& issue : report.issues) {
    if (issue.code == IssueCode::at_cutoff) {
      warned = issue.severity == Severity::warning;
    }
  }
  CHECK(warned);
  // cutoff units count as treated
  CHECK(report.per_period[0].n_right == 1);
}

TEST_CASE("first_difference subtracts periods per unit") {
  const auto data = testutil::make_panel({-0.5, 0.25}, {1.0, 2.0}, {4.0, 2.5});
  const auto fd = first_difference(data);
  REQUIRE(fd.points.size() == 2);
  CHECK(fd.points[0].value == 3.0);
  CHECK(fd.points[0].distance == -0.5);
  CHECK(fd.points[1].value == 0.5);
}

TEST_CASE("first_difference of identical periods is zero") {
  const auto data =
      testutil::make_panel({-0.5, 0.25, 0.75}, {1.0, 2.0, -3.0},
                           {1.0, 2.0, -3.0});
  const auto fd = first_difference(data);
  for (const auto& p : fd.points) CHECK(p.value == 0.0);
}

TEST_CASE("first_difference rejects an unbalanced panel with the report") {
  PanelDataset data = testutil::make_panel({-0.5, 0.25}, {1.0, 2.0}, {1.5, 2.5});
  data.observations.push_back({"straggler", 1, 9.0, 0.4});
  try {
    first_difference(data);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.report().has_error(IssueCode::unbalanced_unit));
  }
}

TEST_CASE("period_slice extracts one period per unit") {
  std::mt19937_64 rng(7);
  const auto distances = testutil::random_distances(rng, 100, 1.0);
  std::vector<double> y0(100), y1(100);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t i = 0; i < 100; ++i) {
    y0[i] = unif(rng);
    y1[i] = unif(rng);
  }
  const auto data = testutil::make_panel(distances, y0, y1);
  const auto slice = period_slice(data, 0);
  REQUIRE(slice.points.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(slice.points[i].value == y0[i]);
  }
  CHECK_THROWS_AS(period_slice(data, 2), DomainError);
  CHECK_THROWS_AS(period_slice(data, -1), DomainError);
}

TEST_CASE("slice difference matches first_difference point for point") {
  std::mt19937_64 rng(11);
  const auto distances = testutil::random_distances(rng, 57, 2.0);
  std::vector<double> y0(57), y1(57);
  std::normal_distribution<double> gauss(0.0, 3.0);
  for (std::size_t i = 0; i < 57; ++i) {
    y0[i] = gauss(rng);
    y1[i] = gauss(rng);
  }
  const auto data = testutil::make_panel(distances, y0, y1);
  const auto fd = first_difference(data);
  const auto s0 = period_slice(data, 0);
  const auto s1 = period_slice(data, 1);
  REQUIRE(fd.points.size() == s0.points.size());
  for (std::size_t i = 0; i < fd.points.size(); ++i) {
    CHECK(fd.points[i].unit_id == s1.points[i].unit_id);
    CHECK(fd.points[i].value == s1.points[i].value - s0.points[i].value);
  }
}

TEST_CASE("swapping periods negates every first difference") {
  std::mt19937_64 rng(13);
  const auto distances = testutil::random_distances(rng, 40, 1.5);
  std::vector<double> y0(40), y1(40);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (std::size_t i = 0; i < 40; ++i) {
    y0[i] = gauss(rng);
    y1[i] = gauss(rng);
  }
  const auto data = testutil::make_panel(distances, y0, y1);
  const auto swapped = testutil::make_panel(distances, y1, y0);
  const auto fd = first_difference(data);
  const auto fd_swapped = first_difference(swapped);
  REQUIRE(fd.points.size() == fd_swapped.points.size());
  for (std::size_t i = 0; i < fd.points.size(); ++i) {
    CHECK(fd.points[i].value == -fd_swapped.points[i].value);
  }
}

TEST_CASE("CSV round trip is lossless at full precision") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> distances, y0, y1;
  for (int i = 0; i < 25; ++i) {
    distances.push_back(unif(rng) * std::pow(10.0, i % 7 - 3));
    y0.push_back(unif(rng) * 1e6);
    y1.push_back(unif(rng) * 1e-6);
  }
  // values with awkward shortest representations
  distances.push_back(0.1);
  y0.push_back(1.0 / 3.0);
  y1.push_back(-2.2250738585072014e-308);
  const auto data = testutil::make_panel(distances, y0, y1);

  std::ostringstream out;
  write_panel_csv(data, out);
  std::istringstream in(out.str());
  const auto reloaded = load_panel(in);

  REQUIRE(reloaded.observations.size() == data.observations.size());
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    CHECK(reloaded.observations[i].unit_id == data.observations[i].unit_id);
    CHECK(reloaded.observations[i].period == data.observations[i].period);
    CHECK(reloaded.observations[i].outcome == data.observations[i].outcome);
    CHECK(reloaded.observations[i].distance == data.observations[i].distance);
  }
}

TEST_CASE("require_valid_cross_section rejects duplicates and non-finite") {
  CrossSection ok = testutil::make_cross_section({-0.5, 0.5}, {1.0, 2.0});
  CHECK_NOTHROW(require_valid_cross_section(ok));

  CrossSection dup = ok;
  dup.points.push_back({"u0", 0.1, 3.0});
  CHECK_THROWS_AS(require_valid_cross_section(dup), DataError);

  CrossSection inf = ok;
  inf.points[0].value = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(require_valid_cross_section(inf), DataError);
}
