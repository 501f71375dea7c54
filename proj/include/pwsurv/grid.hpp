#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pwsurv {

/// Partition 0 = points[0] < points[1] < ... < points[N] = t_max of the
/// modelled time range. Segment i is [points[i], points[i+1]); the last
/// segment is closed so that t_max itself has a segment.
class TimeGrid {
 public:
  /// Throws InvalidArgument unless points start at exactly 0, are strictly
  /// increasing, and contain at least two entries.
  explicit TimeGrid(std::vector<double> points);

  std::size_t segments() const { return widths_.size(); }
  double t_max() const { return points_.back(); }
  std::span<const double> points() const { return points_; }
  std::span<const double> widths() const { return widths_; }
  double point(std::size_t i) const { return points_[i]; }
  double width(std::size_t i) const { return widths_[i]; }

  /// Largest i in [0, N-1] with points[i] <= t. Throws DomainError outside
  /// [0, t_max].
  std::size_t segment_index(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> points_;
  std::vector<double> widths_;
};

/// `n_points` equally spaced points on [0, t_max], both ends included.
TimeGrid make_uniform_grid(double t_max, std::size_t n_points);

}  // namespace pwsurv
