#pragma once

#include "geodid/local_regression.hpp"
#include "geodid/panel_data.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace geodid {

enum class SeriesKind { period0, period1, first_difference };

const char* series_name(SeriesKind kind);

struct Bin {
  Side side = Side::left;
  double center = 0.0;
  double mean_value = 0.0;
  std::size_t count = 0;
};

//! Binned means of a cross-section, computed with equal-width bins per side
//! over the observed distance range so that no bin straddles the cutoff.
//! Only nonempty bins are emitted; centers are strictly increasing within a
//! side, left side first.
struct BinnedSeries {
  SeriesKind label = SeriesKind::period0;
  std::vector<Bin> bins;
};

//! Throws DomainError when n_bins < 2 and InsufficientDataError when a side
//! has no observations.
BinnedSeries binscatter(const CrossSection& points, SeriesKind label,
                        std::size_t n_bins);

}  // namespace geodid
