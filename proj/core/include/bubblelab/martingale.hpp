#pragma once

#include <utility>
#include <vector>

#include "bubblelab/sim.hpp"

namespace bubblelab::martingale {

enum class MartingaleClass { TrueMartingale, StrictLocalMartingale };

// Per-step binary labels aligned with a price path: 1 = true martingale
// regime, 0 = strict local martingale (bubble) regime.
using LabelSeries = std::vector<int>;

// Classification of the power family b(x) = scale * x^exponent.
// True martingale iff exponent <= 1. Requires exponent in (1/2, inf).
MartingaleClass classify_power_exponent(double exponent);

struct TailTestResult {
  MartingaleClass cls;
  double fitted_exponent;  // p in b(x) ~ c * x^p over the fitted tail
};

// Decides integrability of x / b(x)^2 over (epsilon, inf) from a tabulated
// diffusion coefficient. pairs must be strictly increasing in x with b > 0,
// hold at least 16 points at or above epsilon, and span two decades there.
// The tail exponent is fitted by log-log least squares on the upper half of
// the tabulation in log-x; p <= 1 (tolerance 1e-9) means the integral
// diverges and the process is a true martingale.
TailTestResult integral_tail_test(const std::vector<std::pair<double, double>>& pairs,
                                  double epsilon);

// Ground-truth labels for a simulated path: regime i is labeled by the
// exponent of its PowerLawParams. Requires path.regime_ids.
LabelSeries labels_from_regimes(const sim::PricePath& path,
                                const sim::RegimeChainSpec& spec);

}  // namespace bubblelab::martingale
