#include "geodid/binscatter.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace geodid {

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
};

void bin_side(const std::vector<const CrossPoint*>& pts, Side side,
              std::size_t n_bins, std::vector<Bin>& out) {
  if (pts.empty()) {
    throw InsufficientDataError(std::string(side_name(side)) +
                                " side has no observations to bin");
  }

  // Bins span [lo, hi] where one endpoint is the cutoff, so no bin can
  // straddle it.
  double lo = 0.0;
  double hi = 0.0;
  if (side == Side::left) {
    lo = (*std::min_element(pts.begin(), pts.end(),
                            [](const CrossPoint* a, const CrossPoint* b) {
                              return a->distance < b->distance;
                            }))
             ->distance;
    hi = 0.0;
  } else {
    lo = 0.0;
    hi = (*std::max_element(pts.begin(), pts.end(),
                            [](const CrossPoint* a, const CrossPoint* b) {
                              return a->distance < b->distance;
                            }))
             ->distance;
  }

  const double width = (hi - lo) / static_cast<double>(n_bins);
  std::vector<Accumulator> acc(n_bins);
  for (const CrossPoint* p : pts) {
    std::size_t idx = 0;
    if (width > 0.0) {
      const double pos = (p->distance - lo) / width;
      idx = std::min(n_bins - 1,
                     static_cast<std::size_t>(std::max(0.0, std::floor(pos))));
    }
    acc[idx].sum += p->value;
    acc[idx].count += 1;
  }
  for (std::size_t i = 0; i < n_bins; ++i) {
    if (acc[i].count == 0) continue;
    Bin bin;
    bin.side = side;
    bin.center = width > 0.0
                     ? lo + (static_cast<double>(i) + 0.5) * width
                     : lo;
    bin.mean_value = acc[i].sum / static_cast<double>(acc[i].count);
    bin.count = acc[i].count;
    out.push_back(bin);
  }
}

}  // namespace

const char* series_name(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::period0:
      return "period0";
    case SeriesKind::period1:
      return "period1";
    case SeriesKind::first_difference:
      return "first_difference";
  }
  return "unknown";
}

BinnedSeries binscatter(const CrossSection& points, SeriesKind label,
                        std::size_t n_bins) {
  if (n_bins < 2) {
    throw DomainError("bin count must be at least 2");
  }

  std::vector<const CrossPoint*> left;
  std::vector<const CrossPoint*> right;
  for (const auto& p : points.points) {
    (side_of(p.distance) == Side::left ? left : right).push_back(&p);
  }

  BinnedSeries series;
  series.label = label;
  bin_side(left, Side::left, n_bins, series.bins);
  bin_side(right, Side::right, n_bins, series.bins);
  return series;
}

}  // namespace geodid
