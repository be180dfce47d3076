#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sarange/rng.hpp"

namespace sarange {

using Point = std::vector<double>;

struct Interval {
  double low;
  double high;

  double width() const { return high - low; }
  bool operator==(const Interval&) const = default;
};

/// Product of closed intervals [l_1,u_1] x ... x [l_d,u_d]. Every bound is
/// finite and every interval has strictly positive width.
class BoxDomain {
 public:
  explicit BoxDomain(std::vector<Interval> bounds);

  static BoxDomain cube(std::size_t dim, double low, double high);
  /// Parses the flat form l1,u1,l2,u2,... used on the command line.
  static BoxDomain from_flat(std::span<const double> flat);

  std::size_t dim() const { return bounds_.size(); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const Interval& operator[](std::size_t j) const { return bounds_[j]; }
  double min_width() const;

  bool operator==(const BoxDomain&) const = default;

 private:
  std::vector<Interval> bounds_;
};

bool contains(const BoxDomain& domain, std::span<const double> p);

/// Cyclic reflection of a single coordinate into [iv.low, iv.high]: the
/// triangle wave of period 2*(high - low) anchored at low. Points already in
/// the interval are returned unchanged.
double reflect_coordinate(double y, const Interval& iv);

Point reflect(const BoxDomain& domain, std::span<const double> y);
void reflect_in_place(const BoxDomain& domain, std::span<double> y);

/// Largest per-coordinate distance from p to the box; 0 for feasible points.
double excursion(const BoxDomain& domain, std::span<const double> p);

Point sample_uniform(const BoxDomain& domain, Rng& rng);

}  // namespace sarange
