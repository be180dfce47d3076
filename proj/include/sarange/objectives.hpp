#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sarange/domain.hpp"

namespace sarange {

/// A black-box scalar function on R^d. Evaluation must be deterministic and
/// free of shared mutable state so that many chains can query one instance
/// concurrently.
class Objective {
 public:
  using Fn = std::function<double(std::span<const double>)>;
  /// Evaluates `count` points stored row-major (count x dim) into `out`.
  using BatchFn =
      std::function<void(std::span<const double>, std::span<double>)>;

  Objective(std::size_t dim, Fn fn, std::string name = {}, BatchFn batch = {});

  std::size_t dim() const { return dim_; }
  const std::string& name() const { return name_; }

  double operator()(std::span<const double> x) const;
  void evaluate_batch(std::span<const double> points,
                      std::span<double> out) const;

  /// x -> -F(x). Negation is exact in floating point, so minimizing the
  /// negated objective retraces the maximization of this one bit for bit.
  Objective negated() const;

 private:
  std::size_t dim_;
  Fn fn_;
  std::string name_;
  BatchFn batch_;
};

// Analytic test functions.
double ackley(std::span<const double> p);
double drop_wave(std::span<const double> p);
double multi_minima(std::span<const double> p);

Objective ackley_objective();
Objective drop_wave_objective();
Objective multi_minima_objective();

/// Builtin names: "ackley", "dropwave", "multimin".
const std::vector<std::string>& builtin_names();
Objective builtin_objective(std::string_view name);
/// The domain each builtin is studied on.
BoxDomain builtin_domain(std::string_view name);

}  // namespace sarange
