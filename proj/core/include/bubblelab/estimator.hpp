#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "bubblelab/martingale.hpp"
#include "bubblelab/sim.hpp"

namespace bubblelab::estimator {

// Exponent search grid for the window fit; refined by golden-section search
// around the best grid point.
struct GridSpec {
  double lo = 0.51;
  double hi = 2.0;
  std::size_t points = 150;

  void validate() const;
};

struct WindowFit {
  // Raw values rather than PowerLawParams: degenerate windows (all prices
  // equal) report scale 0, which lies outside the params domain.
  double scale = 0.0;
  double exponent = 1.0;
  double objective = 0.0;
  bool degenerate = false;
};

// Least-squares fit of scale^2 * S^(2*exponent) against per-step squared
// increment rates (dS)^2 / dt over one window. prices must be positive with
// at least 32 entries; dt is the step in model time. For each candidate
// exponent the optimal scale^2 has the closed form
// sum(a_i y_i) / sum(a_i^2) with a_i = S_i^(2 exponent), y_i = (dS_i)^2 / dt.
WindowFit fit_power_window(std::span<const double> prices, double dt,
                           const GridSpec& grid = {});

struct RollingConfig {
  std::size_t window_len = 21 * sim::kStepsPerTradingDay;  // 21 trading days
  std::size_t stride = sim::kStepsPerTradingDay;           // 1 trading day
  GridSpec grid{};

  void validate() const;
};

// Rolling-window classification of a path: each window is fitted, labeled 1
// (true martingale) iff the fitted exponent is <= 1, and every step receives
// the label of the most recent window completed by that step. Steps before
// the first complete window carry the first window's label.
martingale::LabelSeries rolling_classify(const sim::PricePath& path,
                                         const RollingConfig& cfg = {});

// Two-state symmetric-layout HMM used to smooth a raw binary label series.
struct HmmSpec {
  std::array<double, 4> transition{0.99, 0.01, 0.01, 0.99};  // row-major, rows sum to 1
  std::array<double, 4> emission{0.8, 0.2, 0.2, 0.8};        // emission[h][o]
  std::array<double, 2> initial{0.5, 0.5};

  void validate() const;
};

// Most probable hidden label sequence via Viterbi in log space. Ties are
// broken toward state 1 at every comparison.
martingale::LabelSeries hmm_smooth(const martingale::LabelSeries& raw,
                                   const HmmSpec& spec = {});

}  // namespace bubblelab::estimator
