#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "uev/density.hpp"

namespace uev {

enum class EvidenceTag { Exact, TypeI, TypeII, TypeIII };

/// The value of y, observed with certainty.
struct ExactEvidence {
  Point value;
};

/// A distribution over y conditioned on external auxiliary evidence zeta. The
/// label is opaque: the update only ever evaluates q(y|zeta), never a density
/// over zeta itself.
struct TypeIEvidence {
  Density q;
  std::string zeta_label;
};

/// A distribution over y asserted conditional on the latent. The conditioning
/// value is not stored: q is specified for one latent configuration only and
/// the update never evaluates it elsewhere.
struct TypeIIEvidence {
  Density q;
};

/// A likelihood of the auxiliary evidence given y: y -> log q(zeta|y).
struct TypeIIIEvidence {
  std::function<double(const Point&)> zeta_log_lik;
  std::string zeta_label;
  /// Set when q(zeta|y) = N(zeta; y, variance) viewed as a function of y, i.e.
  /// mean holds the zeta value; enables analytic routing.
  std::optional<GaussianParams> gaussian_in_y;
};

/// Tagged evidence value; exactly one payload is populated, matching the tag.
class Evidence {
 public:
  static Evidence exact(Point y) { return Evidence(ExactEvidence{std::move(y)}); }
  static Evidence exact(double y) { return exact(Point{y}); }

  static Evidence type1(Density q, std::string zeta_label) {
    return Evidence(TypeIEvidence{std::move(q), std::move(zeta_label)});
  }

  static Evidence type2(Density q) { return Evidence(TypeIIEvidence{std::move(q)}); }

  static Evidence type3(std::function<double(const Point&)> zeta_log_lik,
                        std::string zeta_label) {
    return Evidence(TypeIIIEvidence{std::move(zeta_log_lik), std::move(zeta_label), {}});
  }

  /// Virtual evidence with Gaussian likelihood q(zeta|y) = N(zeta; y, sd^2).
  static Evidence type3_gaussian(double zeta, double sd, std::string zeta_label);

  EvidenceTag tag() const {
    return static_cast<EvidenceTag>(value_.index());
  }

  const ExactEvidence& as_exact() const { return std::get<ExactEvidence>(value_); }
  const TypeIEvidence& as_type1() const { return std::get<TypeIEvidence>(value_); }
  const TypeIIEvidence& as_type2() const { return std::get<TypeIIEvidence>(value_); }
  const TypeIIIEvidence& as_type3() const { return std::get<TypeIIIEvidence>(value_); }

 private:
  // Variant order mirrors EvidenceTag.
  using Payload = std::variant<ExactEvidence, TypeIEvidence, TypeIIEvidence, TypeIIIEvidence>;
  explicit Evidence(Payload value) : value_(std::move(value)) {}
  Payload value_;
};

inline Evidence Evidence::type3_gaussian(double zeta, double sd, std::string zeta_label) {
  TypeIIIEvidence payload;
  payload.zeta_log_lik = [zeta, sd](const Point& y) {
    return normal_log_pdf(zeta, y.at(0), sd);
  };
  payload.zeta_label = std::move(zeta_label);
  payload.gaussian_in_y = GaussianParams{zeta, sd * sd};
  return Evidence(Payload{std::move(payload)});
}

}  // namespace uev
