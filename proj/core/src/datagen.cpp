#include "bubblelab/datagen.hpp"

#include <cmath>
#include <stdexcept>

#include "bubblelab/parallel.hpp"

namespace bubblelab::datagen {

void ScheduleGenerator::validate() const {
  if (!std::isfinite(persistence_lo) || !std::isfinite(persistence_hi))
    throw std::invalid_argument("ScheduleGenerator: persistence must be finite");
  if (!(persistence_lo > 0.5) || !(persistence_hi < 1.0) ||
      persistence_lo > persistence_hi)
    throw std::invalid_argument(
        "ScheduleGenerator: need 0.5 < persistence_lo <= persistence_hi < 1");
  if (redraw_interval == 0)
    throw std::invalid_argument("ScheduleGenerator: redraw_interval must be >= 1");
}

void DatasetSpec::validate() const {
  schedule.validate();
  if (n_paths == 0) throw std::invalid_argument("DatasetSpec: n_paths must be >= 1");
  if (n_steps == 0) throw std::invalid_argument("DatasetSpec: n_steps must be >= 1");
  if (!std::isfinite(dt_seconds) || dt_seconds <= 0.0)
    throw std::invalid_argument("DatasetSpec: dt_seconds must be finite and > 0");
  if (!std::isfinite(s0) || s0 <= 0.0)
    throw std::invalid_argument("DatasetSpec: s0 must be finite and > 0");
  bool has_tm = false, has_slm = false;
  for (const auto& p : state_pool) {
    (p.exponent <= 1.0 ? has_tm : has_slm) = true;
  }
  if (!has_tm || !has_slm)
    throw std::invalid_argument(
        "DatasetSpec: state_pool needs at least one true-martingale and one "
        "strict-local-martingale state");
}

sim::RegimeChainSpec draw_chain(const DatasetSpec& spec, RngSpec chain_rng) {
  Pcg64 gen(chain_rng);
  const std::size_t k = spec.state_pool.size();

  sim::RegimeChainSpec chain;
  chain.states = spec.state_pool;
  chain.initial_state = static_cast<std::size_t>(gen.uniform_index(k));
  for (std::size_t start = 0; start < spec.n_steps; start += spec.schedule.redraw_interval) {
    sim::TransitionStage stage;
    stage.start_step = start;
    stage.matrix.assign(k * k, 0.0);
    for (std::size_t row = 0; row < k; ++row) {
      const double p = gen.uniform(spec.schedule.persistence_lo, spec.schedule.persistence_hi);
      const double off = k > 1 ? (1.0 - p) / static_cast<double>(k - 1) : 0.0;
      for (std::size_t col = 0; col < k; ++col) stage.matrix[row * k + col] = off;
      stage.matrix[row * k + row] = k > 1 ? p : 1.0;
    }
    chain.schedule.push_back(std::move(stage));
  }
  chain.validate();
  return chain;
}

std::vector<LabeledPath> generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  const double dt_years = sim::years_from_seconds(spec.dt_seconds);

  std::vector<LabeledPath> out(spec.n_paths);
  parallel_for(spec.n_paths, [&](std::size_t k) {
    const auto chain = draw_chain(spec, spec.rng.offset(2 * k));
    out[k].path =
        sim::simulate_path(chain, spec.s0, spec.n_steps, dt_years, spec.rng.offset(2 * k + 1));
    out[k].labels = martingale::labels_from_regimes(out[k].path, chain);
  });
  return out;
}

}  // namespace bubblelab::datagen
