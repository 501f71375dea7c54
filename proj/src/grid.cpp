#include "pwsurv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pwsurv/error.hpp"

namespace pwsurv {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw InvalidArgument("time grid needs at least 2 points, got " +
                          std::to_string(points_.size()));
  }
  if (points_.front() != 0.0) {
    throw InvalidArgument("time grid must start at 0");
  }
  widths_.reserve(points_.size() - 1);
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const double w = points_[i + 1] - points_[i];
    if (!std::isfinite(points_[i + 1]) || !(w > 0.0)) {
      throw InvalidArgument("time grid points must be finite and strictly increasing (index " +
                            std::to_string(i + 1) + ")");
    }
    widths_.push_back(w);
  }
}

std::size_t TimeGrid::segment_index(double t) const {
  if (!(t >= 0.0) || t > t_max()) {
    throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(t_max()) + "]");
  }
  // First point strictly greater than t; its predecessor starts t's segment.
  const auto it = std::upper_bound(points_.begin(), points_.end(), t);
  const auto idx = static_cast<std::size_t>(it - points_.begin()) - 1;
  return std::min(idx, segments() - 1);
}

TimeGrid make_uniform_grid(double t_max, std::size_t n_points) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw InvalidArgument("t_max must be positive and finite");
  }
  if (n_points < 2) {
    throw InvalidArgument("uniform grid needs n_points >= 2");
  }
  std::vector<double> pts(n_points);
  const double n_seg = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    pts[i] = t_max * (static_cast<double>(i) / n_seg);
  }
  pts.back() = t_max;
  return TimeGrid(std::move(pts));
}

}  // namespace pwsurv
