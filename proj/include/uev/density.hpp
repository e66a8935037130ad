#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "uev/gaussian.hpp"
#include "uev/rng.hpp"

namespace uev {

using Point = std::vector<double>;

enum class SupportKind { RealLine, PositiveReals, FiniteSet };

struct Support {
  SupportKind kind = SupportKind::RealLine;
  std::vector<double> values;  // atoms, FiniteSet only

  bool contains(double v) const;

  static Support real_line() { return {SupportKind::RealLine, {}}; }
  static Support positive_reals() { return {SupportKind::PositiveReals, {}}; }
  static Support finite_set(std::vector<double> atoms) {
    return {SupportKind::FiniteSet, std::move(atoms)};
  }
};

/// A probability density (or mass function) with a pointwise log-pdf and a
/// sampler. log_pdf returns -infinity off the declared support and never NaN
/// on it; sample always lands in the support.
struct Density {
  std::function<double(const Point&)> log_pdf;
  std::function<Point(RngStream&)> sample;
  Support support;
  int dimension = 1;
  /// Set when this density is exactly Normal(mean, variance); lets the
  /// dispatcher route to closed-form updates.
  std::optional<GaussianParams> gaussian;
};

Density normal_density(double mean, double sd);

/// Normal(mean, sd^2) restricted to (lower, inf), renormalized.
Density truncated_normal_density(double mean, double sd, double lower);

/// Unit mass at a single value; log_pdf is 0 at the atom and -infinity elsewhere.
Density point_mass_density(double value);

/// Finite-support mass function over the given atoms.
Density finite_density(std::vector<double> values, std::vector<double> probs);

}  // namespace uev
