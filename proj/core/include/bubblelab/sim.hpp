#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bubblelab/rng.hpp"

namespace bubblelab::sim {

// Model time is measured in trading years. Price paths additionally carry
// wall-clock timestamps at dt seconds per step; the two are linked by the
// calibration below (252 trading days of 6.5 hours).
inline constexpr double kTradingSecondsPerYear = 252.0 * 6.5 * 3600.0;
inline constexpr std::size_t kStepsPerTradingDay = 195;  // 6.5 h at 2-minute sampling
inline constexpr std::size_t kTradingDaysPerYear = 252;

inline constexpr double years_from_seconds(double seconds) {
  return seconds / kTradingSecondsPerYear;
}

// Diffusion coefficient family b(x) = scale * x^exponent.
// exponent <= 1 gives a true martingale, exponent > 1 a strict local one.
struct PowerLawParams {
  PowerLawParams(double scale, double exponent);

  double scale;
  double exponent;
};

struct TransitionStage {
  std::size_t start_step = 0;
  std::vector<double> matrix;  // row-major K x K, rows sum to 1
};

// Markov regime chain with a piecewise-constant schedule of transition
// matrices. Stage i is in force from its start_step until the next stage.
struct RegimeChainSpec {
  std::vector<PowerLawParams> states;
  std::vector<TransitionStage> schedule;
  std::size_t initial_state = 0;

  void validate() const;
  const std::vector<double>& matrix_at(std::size_t step) const;

  static RegimeChainSpec single_state(PowerLawParams p);
  // Two states with a constant matrix [[pa, 1-pa], [1-pb, pb]].
  static RegimeChainSpec two_state(PowerLawParams a, PowerLawParams b,
                                   double persistence_a, double persistence_b);
};

struct PricePath {
  std::int64_t t0 = 0;  // epoch seconds
  double dt = 0.0;      // seconds per step
  std::vector<double> prices;
  std::optional<std::vector<int>> regime_ids;  // aligned with prices when present

  std::size_t size() const { return prices.size(); }
  std::int64_t timestamp(std::size_t i) const;
  double dt_years() const { return years_from_seconds(dt); }
};

// The pre-truncation diffusion term scale * s^exponent * sqrt(dt). Exposed so
// the +-z antisymmetry of one step (and hence the exact conditional mean) is
// testable as a floating-point identity.
double diffusion_term(double s, const PowerLawParams& p, double dt);

// Next state drawn from row `row` of a row-major k x k stochastic matrix by
// inverse CDF walk over u in [0, 1).
std::size_t sample_transition(const std::vector<double>& matrix, std::size_t k,
                              std::size_t row, double u);

// One Euler step s -> max(0, s + diffusion_term * z). 0 is absorbing.
double step_euler(double s, const PowerLawParams& p, double dt, double z);

// Simulates n_steps Euler steps under the regime chain. dt_years is the step
// in model time; the stored PricePath dt is the equivalent in seconds.
// regime_ids[i] governs the increment from i to i+1.
PricePath simulate_path(const RegimeChainSpec& spec, double s0, std::size_t n_steps,
                        double dt_years, RngSpec rng, std::int64_t t0 = 0);

// n_paths independent paths; path k uses substream rng.offset(k). Results are
// identical for any thread count.
std::vector<PricePath> simulate_ensemble(const RegimeChainSpec& spec, double s0,
                                         std::size_t n_steps, double dt_years,
                                         std::size_t n_paths, RngSpec rng);

// Doubling strategy on fair coin flips: stake doubles after every loss, play
// stops at the first win or after n_rounds rounds. Returns terminal wealths,
// each exactly 1 or -(2^n_rounds - 1). Exact integer arithmetic; n_rounds
// beyond the representable range is refused.
std::vector<std::int64_t> simulate_doubling(unsigned n_rounds, std::size_t n_paths,
                                            RngSpec rng);

}  // namespace bubblelab::sim
