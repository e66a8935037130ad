#pragma once

#include <stdexcept>
#include <string>

namespace uev {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// Engine cannot handle the given (model, evidence) pair, e.g. requesting the
/// analytic engine on a model outside the recognized conjugate family.
struct UnsupportedCombination : Error {
  using Error::Error;
};

struct BudgetTooSmall : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

/// Evidence places mass on a y value whose model marginal is zero.
struct ZeroMarginal : Error {
  using Error::Error;
};

/// Likelihood ratios annihilate all joint mass; may indicate model misspecification.
struct DegenerateEvidence : Error {
  using Error::Error;
};

/// The requested evidence cannot coexist with the base model (no extended joint exists).
struct InconsistentEvidence : Error {
  using Error::Error;
};

/// Every importance weight vanished: proposal and target share no support.
struct AllWeightsZero : Error {
  using Error::Error;
};

struct InitOffSupport : Error {
  using Error::Error;
};

struct TooFewDraws : Error {
  using Error::Error;
};

/// Normalized distributional inference was requested without a Z(x) evaluator.
struct NormalizerUnavailable : Error {
  using Error::Error;
};

}  // namespace uev
