#include "sarange/objectives.hpp"

#include <cmath>
#include <numbers>

#include "sarange/error.hpp"

namespace sarange {

Objective::Objective(std::size_t dim, Fn fn, std::string name, BatchFn batch)
    : dim_(dim), fn_(std::move(fn)), name_(std::move(name)),
      batch_(std::move(batch)) {
  require(dim_ >= 1, "objective dimension must be at least 1");
  require(static_cast<bool>(fn_), "objective needs an evaluation function");
}

double Objective::operator()(std::span<const double> x) const {
  require_dimension(dim_, x.size(), "objective '" + name_ + "'");
  return fn_(x);
}

void Objective::evaluate_batch(std::span<const double> points,
                               std::span<double> out) const {
  require(points.size() == out.size() * dim_,
          "batch evaluation: point buffer does not match output count");
  if (batch_) {
    batch_(points, out);
    return;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = fn_(points.subspan(i * dim_, dim_));
  }
}

Objective Objective::negated() const {
  BatchFn batch;
  if (batch_) {
    batch = [inner = batch_](std::span<const double> pts, std::span<double> out) {
      inner(pts, out);
      for (double& v : out) v = -v;
    };
  }
  return Objective(
      dim_, [inner = fn_](std::span<const double> x) { return -inner(x); },
      "-" + name_, std::move(batch));
}

double ackley(std::span<const double> p) {
  require_dimension(2, p.size(), "ackley");
  using std::numbers::e;
  using std::numbers::pi;
  const double x1 = p[0];
  const double x2 = p[1];
  return -20.0 * std::exp(-0.2 * std::sqrt(0.5 * (x1 * x1 + x2 * x2))) -
         std::exp(0.5 * (std::cos(2.0 * pi * x1) + std::cos(2.0 * pi * x2))) +
         e + 20.0;
}

double drop_wave(std::span<const double> p) {
  require_dimension(2, p.size(), "drop_wave");
  const double r2 = p[0] * p[0] + p[1] * p[1];
  return -(1.0 + std::cos(12.0 * std::sqrt(r2))) / (0.5 * r2 + 2.0);
}

double multi_minima(std::span<const double> p) {
  require_dimension(3, p.size(), "multi_minima");
  double sum = 0.0;
  for (double v : p) {
    const double t = v * v - 1.0;
    sum += t * t;
  }
  return sum;
}

Objective ackley_objective() { return Objective(2, ackley, "ackley"); }
Objective drop_wave_objective() { return Objective(2, drop_wave, "dropwave"); }
Objective multi_minima_objective() {
  return Objective(3, multi_minima, "multimin");
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"ackley", "dropwave",
                                                 "multimin"};
  return names;
}

namespace {

std::string unknown_builtin(std::string_view name) {
  std::string msg = "unknown objective '" + std::string(name) + "'; builtins:";
  for (const auto& n : builtin_names()) msg += " " + n;
  return msg;
}

}  // namespace

Objective builtin_objective(std::string_view name) {
  if (name == "ackley") return ackley_objective();
  if (name == "dropwave") return drop_wave_objective();
  if (name == "multimin") return multi_minima_objective();
  throw Error(ErrorCode::invalid_argument, unknown_builtin(name));
}

BoxDomain builtin_domain(std::string_view name) {
  if (name == "ackley") return BoxDomain::cube(2, -4.0, 4.0);
  if (name == "dropwave") return BoxDomain::cube(2, -5.12, 5.12);
  if (name == "multimin") return BoxDomain::cube(3, -3.0, 3.0);
  throw Error(ErrorCode::invalid_argument, unknown_builtin(name));
}

}  // namespace sarange
