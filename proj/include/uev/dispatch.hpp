#pragma once

#include "uev/evidence.hpp"
#include "uev/montecarlo.hpp"
#include "uev/posterior.hpp"

namespace uev {

/// Routes an evidence value to the matching update rule and engine:
///   Exact    -> conditioning on y
///   TypeI    -> Jeffrey's rule (mixture of conditionals under q(y|zeta))
///   TypeII   -> distributional evidence (pseudo-likelihood of the event y ~ q)
///   TypeIII  -> virtual evidence (extended joint with likelihood q(zeta|y))
/// Engines: analytic-gaussian and discrete-exact require the model (and, for
/// analytic routing, the evidence) to carry the matching descriptors; snis and
/// mh work on any model. Deterministic given the engine seed.
Posterior dispatch_infer(const BaseModel& model, const Evidence& evidence,
                         const EngineConfig& engine);

}  // namespace uev
