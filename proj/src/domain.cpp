#include "sarange/domain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sarange/error.hpp"

namespace sarange {

BoxDomain::BoxDomain(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
  require(!bounds_.empty(), "domain must have at least one dimension");
  for (std::size_t j = 0; j < bounds_.size(); ++j) {
    const auto& iv = bounds_[j];
    require(std::isfinite(iv.low) && std::isfinite(iv.high),
            "domain bound " + std::to_string(j) + " is not finite");
    require(iv.low < iv.high, "domain bound " + std::to_string(j) +
                                  " must satisfy low < high");
  }
}

BoxDomain BoxDomain::cube(std::size_t dim, double low, double high) {
  return BoxDomain(std::vector<Interval>(dim, Interval{low, high}));
}

BoxDomain BoxDomain::from_flat(std::span<const double> flat) {
  require(!flat.empty() && flat.size() % 2 == 0,
          "domain needs an even number of values l1,u1,...,ld,ud");
  std::vector<Interval> bounds;
  for (std::size_t j = 0; j < flat.size(); j += 2) {
    bounds.push_back({flat[j], flat[j + 1]});
  }
  return BoxDomain(std::move(bounds));
}

double BoxDomain::min_width() const {
  double w = bounds_.front().width();
  for (const auto& iv : bounds_) w = std::min(w, iv.width());
  return w;
}

bool contains(const BoxDomain& domain, std::span<const double> p) {
  require_dimension(domain.dim(), p.size(), "contains");
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] >= domain[j].low && p[j] <= domain[j].high)) return false;
  }
  return true;
}

double reflect_coordinate(double y, const Interval& iv) {
  if (y >= iv.low && y <= iv.high) return y;
  const double w = iv.width();
  const double period = 2.0 * w;
  // Mathematical modulo: always in [0, period).
  double r = std::fmod(y - iv.low, period);
  if (r < 0.0) r += period;
  // r == w lands on the upper face through the first branch.
  const double folded = r <= w ? iv.low + r : iv.high - (r - w);
  return std::clamp(folded, iv.low, iv.high);
}

Point reflect(const BoxDomain& domain, std::span<const double> y) {
  Point out(y.begin(), y.end());
  reflect_in_place(domain, out);
  return out;
}

void reflect_in_place(const BoxDomain& domain, std::span<double> y) {
  require_dimension(domain.dim(), y.size(), "reflect");
  for (std::size_t j = 0; j < y.size(); ++j) {
    y[j] = reflect_coordinate(y[j], domain[j]);
  }
}

double excursion(const BoxDomain& domain, std::span<const double> p) {
  require_dimension(domain.dim(), p.size(), "excursion");
  double worst = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    worst = std::max({worst, domain[j].low - p[j], p[j] - domain[j].high});
  }
  return worst;
}

Point sample_uniform(const BoxDomain& domain, Rng& rng) {
  Point p(domain.dim());
  for (std::size_t j = 0; j < p.size(); ++j) {
    std::uniform_real_distribution<double> dist(domain[j].low, domain[j].high);
    p[j] = dist(rng);
  }
  return p;
}

}  // namespace sarange
