#include "uev/density.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "uev/errors.hpp"

namespace uev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool close_to(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

double scalar_of(const Point& p) {
  if (p.size() != 1) {
    throw DimensionMismatch("expected a scalar point, got dimension " +
                            std::to_string(p.size()));
  }
  return p[0];
}

}  // namespace

bool Support::contains(double v) const {
  switch (kind) {
    case SupportKind::RealLine:
      return std::isfinite(v);
    case SupportKind::PositiveReals:
      return v > 0.0 && std::isfinite(v);
    case SupportKind::FiniteSet:
      for (double atom : values) {
        if (close_to(v, atom)) return true;
      }
      return false;
  }
  return false;
}

Density normal_density(double mean, double sd) {
  if (!(sd > 0.0)) {
    throw DomainError("normal_density: sd must be positive, got " + std::to_string(sd));
  }
  Density d;
  d.support = Support::real_line();
  d.dimension = 1;
  d.gaussian = GaussianParams{mean, sd * sd};
  d.log_pdf = [mean, sd](const Point& p) { return normal_log_pdf(scalar_of(p), mean, sd); };
  d.sample = [mean, sd](RngStream& rng) { return Point{rng.normal(mean, sd)}; };
  return d;
}

Density truncated_normal_density(double mean, double sd, double lower) {
  if (!(sd > 0.0)) {
    throw DomainError("truncated_normal_density: sd must be positive");
  }
  const double z = (lower - mean) / (sd * std::sqrt(2.0));
  const double tail_mass = 0.5 * std::erfc(z);
  if (!(tail_mass > 0.0)) {
    throw DomainError("truncated_normal_density: no mass above the truncation point");
  }
  const double log_tail = std::log(tail_mass);
  Density d;
  d.support = lower == 0.0 ? Support::positive_reals() : Support::real_line();
  d.dimension = 1;
  d.log_pdf = [mean, sd, lower, log_tail](const Point& p) {
    const double v = scalar_of(p);
    if (v <= lower) return kNegInf;
    return normal_log_pdf(v, mean, sd) - log_tail;
  };
  d.sample = [mean, sd, lower](RngStream& rng) {
    // Rejection against the untruncated normal; fine for the weakly truncated
    // priors used here.
    for (;;) {
      const double v = rng.normal(mean, sd);
      if (v > lower) return Point{v};
    }
  };
  return d;
}

Density point_mass_density(double value) {
  Density d;
  d.support = Support::finite_set({value});
  d.dimension = 1;
  d.log_pdf = [value](const Point& p) {
    return close_to(scalar_of(p), value) ? 0.0 : kNegInf;
  };
  d.sample = [value](RngStream&) { return Point{value}; };
  return d;
}

Density finite_density(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size()) {
    throw DimensionMismatch("finite_density: values and probs must match and be non-empty");
  }
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw DomainError("finite_density: probabilities must be finite and non-negative");
    }
    total += p;
  }
  if (!(total > 0.0)) {
    throw DomainError("finite_density: total mass is zero");
  }
  for (double& p : probs) p /= total;

  Density d;
  d.support = Support::finite_set(values);
  d.dimension = 1;
  d.log_pdf = [values, probs](const Point& p) {
    const double v = scalar_of(p);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (close_to(v, values[i])) {
        return probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
      }
    }
    return kNegInf;
  };
  d.sample = [values, probs](RngStream& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      acc += probs[i];
      if (u < acc) return Point{values[i]};
    }
    return Point{values.back()};
  };
  return d;
}

}  // namespace uev
