#pragma once

#include <limits>
#include <vector>

namespace fracheat {

// Uniform periodic grid t_j = -T_grid + j dt on [-T_grid, T_grid), N_t even.
// Frequencies use DFT order: rho_m = m' drho with m' = m for m < N/2 and
// m - N otherwise, drho = pi / T_grid. The bin m = N/2 is the Nyquist bin.
class TimeGrid {
 public:
  TimeGrid(double half_width, int samples, double horizon = 0.0);
  // T_grid = pad_factor * T.
  static TimeGrid padded(double horizon, double pad_factor, int samples);

  double half_width() const { return half_width_; }
  // Physical horizon T. Zero when the grid was built without one.
  double horizon() const { return horizon_; }
  int size() const { return samples_; }
  double dt() const { return 2.0 * half_width_ / samples_; }
  double drho() const;
  double time(int j) const { return -half_width_ + j * dt(); }
  int signed_bin(int m) const { return m < samples_ / 2 ? m : m - samples_; }
  double frequency(int m) const;
  bool is_nyquist(int m) const { return m == samples_ / 2; }
  // Index of the node nearest to t, clamped to the grid.
  int nearest_index(double t) const;

  bool operator==(const TimeGrid& other) const {
    return half_width_ == other.half_width_ && samples_ == other.samples_ && horizon_ == other.horizon_;
  }
  bool compatible(const TimeGrid& other) const {
    return half_width_ == other.half_width_ && samples_ == other.samples_;
  }

 private:
  double half_width_;
  int samples_;
  double horizon_;
};

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

// Finite union of intervals. Endpoints snap to the nearest node and the snapped
// index range is closed.
class TimeSet {
 public:
  TimeSet() = default;
  explicit TimeSet(std::vector<Interval> parts) : parts_(std::move(parts)) {}
  static TimeSet up_to(double T) { return TimeSet({Interval{-std::numeric_limits<double>::infinity(), T}}); }
  static TimeSet between(double a, double b) { return TimeSet({Interval{a, b}}); }

  std::vector<bool> mask(const TimeGrid& grid) const;
  const std::vector<Interval>& parts() const { return parts_; }

 private:
  std::vector<Interval> parts_;
};

// Indices j with a < t_j < b strictly.
std::vector<int> interior_indices(const TimeGrid& grid, double a, double b);

}  // namespace fracheat
