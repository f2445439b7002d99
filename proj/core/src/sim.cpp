#include "bubblelab/sim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bubblelab/parallel.hpp"

namespace bubblelab::sim {

namespace {

bool row_stochastic(const std::vector<double>& m, std::size_t k, std::size_t row) {
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double p = m[row * k + j];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= 1e-12;
}

}  // namespace

std::size_t sample_transition(const std::vector<double>& matrix, std::size_t k,
                              std::size_t row, double u) {
  double cum = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    cum += matrix[row * k + j];
    if (u < cum) return j;
  }
  return k - 1;
}

PowerLawParams::PowerLawParams(double scale_, double exponent_)
    : scale(scale_), exponent(exponent_) {
  if (!std::isfinite(scale) || scale <= 0.0)
    throw std::invalid_argument("PowerLawParams: scale must be finite and > 0");
  if (!std::isfinite(exponent) || exponent <= 0.5)
    throw std::invalid_argument("PowerLawParams: exponent must be finite and > 1/2");
}

void RegimeChainSpec::validate() const {
  const std::size_t k = states.size();
  if (k == 0) throw std::invalid_argument("RegimeChainSpec: no states");
  if (initial_state >= k)
    throw std::invalid_argument("RegimeChainSpec: initial_state out of range");
  if (schedule.empty())
    throw std::invalid_argument("RegimeChainSpec: empty transition schedule");
  if (schedule.front().start_step != 0)
    throw std::invalid_argument("RegimeChainSpec: schedule must start at step 0");
  std::size_t prev = 0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& stage = schedule[i];
    if (i > 0 && stage.start_step <= prev)
      throw std::invalid_argument("RegimeChainSpec: schedule start steps must increase");
    prev = stage.start_step;
    if (stage.matrix.size() != k * k)
      throw std::invalid_argument("RegimeChainSpec: matrix dimension mismatch");
    for (std::size_t row = 0; row < k; ++row) {
      if (!row_stochastic(stage.matrix, k, row))
        throw std::invalid_argument("RegimeChainSpec: row " + std::to_string(row) +
                                    " is not a probability distribution");
    }
  }
}

const std::vector<double>& RegimeChainSpec::matrix_at(std::size_t step) const {
  // Last stage whose start_step <= step.
  std::size_t lo = 0;
  for (std::size_t i = 1; i < schedule.size() && schedule[i].start_step <= step; ++i)
    lo = i;
  return schedule[lo].matrix;
}

RegimeChainSpec RegimeChainSpec::single_state(PowerLawParams p) {
  RegimeChainSpec spec{{p}, {TransitionStage{0, {1.0}}}, 0};
  return spec;
}

RegimeChainSpec RegimeChainSpec::two_state(PowerLawParams a, PowerLawParams b,
                                           double persistence_a, double persistence_b) {
  RegimeChainSpec spec{{a, b},
                       {TransitionStage{0,
                                        {persistence_a, 1.0 - persistence_a,
                                         1.0 - persistence_b, persistence_b}}},
                       0};
  spec.validate();
  return spec;
}

std::int64_t PricePath::timestamp(std::size_t i) const {
  return t0 + std::llround(dt * static_cast<double>(i));
}

double diffusion_term(double s, const PowerLawParams& p, double dt) {
  if (!std::isfinite(s) || s < 0.0) throw std::domain_error("diffusion_term: s must be finite and >= 0");
  if (!std::isfinite(dt) || dt <= 0.0) throw std::domain_error("diffusion_term: dt must be finite and > 0");
  if (s == 0.0) return 0.0;
  return p.scale * std::pow(s, p.exponent) * std::sqrt(dt);
}

double step_euler(double s, const PowerLawParams& p, double dt, double z) {
  if (!std::isfinite(z)) throw std::domain_error("step_euler: z must be finite");
  const double term = diffusion_term(s, p, dt);
  const double next = s + term * z;
  return next > 0.0 ? next : 0.0;
}

PricePath simulate_path(const RegimeChainSpec& spec, double s0, std::size_t n_steps,
                        double dt_years, RngSpec rng, std::int64_t t0) {
  spec.validate();
  if (!std::isfinite(s0) || s0 <= 0.0)
    throw std::invalid_argument("simulate_path: s0 must be finite and > 0");
  if (!std::isfinite(dt_years) || dt_years <= 0.0)
    throw std::invalid_argument("simulate_path: dt must be finite and > 0");

  const std::size_t k = spec.states.size();
  Pcg64 gen(rng);

  PricePath path;
  path.t0 = t0;
  path.dt = dt_years * kTradingSecondsPerYear;
  path.prices.resize(n_steps + 1);
  path.regime_ids.emplace(n_steps + 1);

  auto& prices = path.prices;
  auto& regimes = *path.regime_ids;
  prices[0] = s0;
  regimes[0] = static_cast<int>(spec.initial_state);

  std::size_t regime = spec.initial_state;
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double z = gen.normal();
    prices[i + 1] = step_euler(prices[i], spec.states[regime], dt_years, z);
    if (k > 1) {
      const double u = gen.uniform();
      regime = sample_transition(spec.matrix_at(i), k, regime, u);
    }
    regimes[i + 1] = static_cast<int>(regime);
  }
  return path;
}

std::vector<PricePath> simulate_ensemble(const RegimeChainSpec& spec, double s0,
                                         std::size_t n_steps, double dt_years,
                                         std::size_t n_paths, RngSpec rng) {
  std::vector<PricePath> paths(n_paths);
  parallel_for(n_paths, [&](std::size_t k) {
    paths[k] = simulate_path(spec, s0, n_steps, dt_years, rng.offset(k));
  });
  return paths;
}

std::vector<std::int64_t> simulate_doubling(unsigned n_rounds, std::size_t n_paths,
                                            RngSpec rng) {
  if (n_rounds == 0) throw std::invalid_argument("simulate_doubling: n_rounds must be >= 1");
  // Terminal loss is -(2^n - 1); past 62 rounds that exceeds int64.
  if (n_rounds > 62)
    throw std::domain_error("simulate_doubling: 2^n_rounds exceeds exact integer range");

  std::vector<std::int64_t> wealth(n_paths);
  parallel_for(n_paths, [&](std::size_t k) {
    Pcg64 gen(rng.offset(k));
    std::int64_t x = 0;
    for (unsigned round = 0; round < n_rounds; ++round) {
      const bool win = gen.uniform() < 0.5;
      // Stake is always 1 - x, bringing wealth to exactly 1 on a win.
      if (win) {
        x = 1;
        break;
      }
      x = x - (1 - x);  // x + (1 - x) * (-1)
    }
    wealth[k] = x;
  });
  return wealth;
}

}  // namespace bubblelab::sim
