#pragma once

#include <cstddef>
#include <vector>

#include "bubblelab/martingale.hpp"
#include "bubblelab/rng.hpp"
#include "bubblelab/sim.hpp"

namespace bubblelab::datagen {

// How transition matrices are re-drawn along a path: every redraw_interval
// steps each state receives a fresh diagonal persistence uniform in
// [persistence_lo, persistence_hi], with the remainder split evenly across
// the other states.
struct ScheduleGenerator {
  double persistence_lo = 0.995;
  double persistence_hi = 0.9999;
  std::size_t redraw_interval = 21 * sim::kStepsPerTradingDay;

  void validate() const;
};

struct DatasetSpec {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  double dt_seconds = 120.0;
  double s0 = 1.0;
  std::vector<sim::PowerLawParams> state_pool;
  ScheduleGenerator schedule{};
  RngSpec rng{};

  void validate() const;
};

struct LabeledPath {
  sim::PricePath path;
  martingale::LabelSeries labels;
};

// Builds the per-path regime chain (initial state uniform over the pool,
// matrices re-drawn on the schedule) and simulates it. Path k draws its chain
// from substream rng.offset(2k) and its prices from rng.offset(2k+1), so the
// corpus is reproducible and paths are independent.
std::vector<LabeledPath> generate_dataset(const DatasetSpec& spec);

// Chain construction exposed for tests.
sim::RegimeChainSpec draw_chain(const DatasetSpec& spec, RngSpec chain_rng);

}  // namespace bubblelab::datagen
