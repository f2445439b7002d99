#include "bubblelab/martingale.hpp"

#include <cmath>
#include <stdexcept>

namespace bubblelab::martingale {

namespace {
constexpr double kBoundaryTol = 1e-9;
}

MartingaleClass classify_power_exponent(double exponent) {
  if (!std::isfinite(exponent) || exponent <= 0.5)
    throw std::domain_error("classify_power_exponent: exponent must be finite and > 1/2");
  return exponent <= 1.0 ? MartingaleClass::TrueMartingale
                         : MartingaleClass::StrictLocalMartingale;
}

TailTestResult integral_tail_test(const std::vector<std::pair<double, double>>& pairs,
                                  double epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0)
    throw std::invalid_argument("integral_tail_test: epsilon must be finite and > 0");

  std::vector<std::pair<double, double>> tail;
  tail.reserve(pairs.size());
  double prev_x = -1.0;
  for (const auto& [x, b] : pairs) {
    if (!std::isfinite(x) || !std::isfinite(b))
      throw std::invalid_argument("integral_tail_test: non-finite tabulation entry");
    if (x <= prev_x)
      throw std::invalid_argument("integral_tail_test: x values must be strictly increasing");
    prev_x = x;
    if (b <= 0.0)
      throw std::domain_error("integral_tail_test: b(x) must be positive");
    if (x >= epsilon) tail.emplace_back(x, b);
  }

  if (tail.size() < 16)
    throw std::invalid_argument("integral_tail_test: need at least 16 points above epsilon");
  if (tail.back().first < 100.0 * tail.front().first)
    throw std::invalid_argument(
        "integral_tail_test: tabulation must span two decades above epsilon");

  // Fit b(x) ~ c * x^p on the upper half of the tabulation in log-x; the
  // integrand x / b(x)^2 ~ x^(1-2p) converges at infinity iff p > 1.
  const double log_lo = std::log(tail.front().first);
  const double log_hi = std::log(tail.back().first);
  const double log_mid = 0.5 * (log_lo + log_hi);

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (const auto& [x, b] : tail) {
    const double lx = std::log(x);
    if (lx < log_mid) continue;
    const double ly = std::log(b);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 4)
    throw std::invalid_argument("integral_tail_test: too few points in the fitted tail");

  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom <= 0.0)
    throw std::invalid_argument("integral_tail_test: degenerate tail abscissae");
  const double p = (static_cast<double>(n) * sxy - sx * sy) / denom;

  const MartingaleClass cls = p <= 1.0 + kBoundaryTol
                                  ? MartingaleClass::TrueMartingale
                                  : MartingaleClass::StrictLocalMartingale;
  return TailTestResult{cls, p};
}

LabelSeries labels_from_regimes(const sim::PricePath& path,
                                const sim::RegimeChainSpec& spec) {
  spec.validate();
  if (!path.regime_ids)
    throw std::invalid_argument("labels_from_regimes: path has no regime ids");
  const auto& regimes = *path.regime_ids;
  if (regimes.size() != path.prices.size())
    throw std::invalid_argument("labels_from_regimes: regime/price length mismatch");

  LabelSeries labels(regimes.size());
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    const int r = regimes[i];
    if (r < 0 || static_cast<std::size_t>(r) >= spec.states.size())
      throw std::invalid_argument("labels_from_regimes: regime id out of range");
    labels[i] =
        classify_power_exponent(spec.states[static_cast<std::size_t>(r)].exponent) ==
                MartingaleClass::TrueMartingale
            ? 1
            : 0;
  }
  return labels;
}

}  // namespace bubblelab::martingale
