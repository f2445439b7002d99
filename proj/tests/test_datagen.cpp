#include <cmath>
#include <stdexcept>
#include <vector>

#include "bubblelab/datagen.hpp"
#include "bubblelab/parallel.hpp"
#include "doctest.h"

using namespace bubblelab;
using datagen::DatasetSpec;
using datagen::ScheduleGenerator;

namespace {

DatasetSpec small_spec() {
  DatasetSpec spec;
  spec.n_paths = 4;
  spec.n_steps = 100;
  spec.dt_seconds = 120.0;
  spec.s0 = 1.0;
  spec.state_pool = {{0.15, 0.9}, {0.15, 1.2}};
  spec.schedule.persistence_lo = 0.9;
  spec.schedule.persistence_hi = 0.99;
  spec.schedule.redraw_interval = 30;
  spec.rng = RngSpec{101, 0};
  return spec;
}

bool same_corpus(const std::vector<datagen::LabeledPath>& a,
                 const std::vector<datagen::LabeledPath>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].path.prices != b[k].path.prices) return false;
    if (a[k].path.regime_ids != b[k].path.regime_ids) return false;
    if (a[k].labels != b[k].labels) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("datagen") {

TEST_CASE("schedule generator validates") {
  CHECK_NOTHROW(ScheduleGenerator{}.validate());
  ScheduleGenerator bad;
  bad.persistence_lo = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ScheduleGenerator{};
  bad.persistence_hi = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ScheduleGenerator{};
  bad.persistence_lo = 0.999;
  bad.persistence_hi = 0.998;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ScheduleGenerator{};
  bad.persistence_lo = std::nan("");
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ScheduleGenerator{};
  bad.redraw_interval = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("dataset spec needs both classes in the pool") {
  DatasetSpec spec = small_spec();
  CHECK_NOTHROW(spec.validate());

  spec.state_pool = {{0.15, 0.9}, {0.15, 1.0}};  // exponent 1 is still a martingale
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.state_pool = {{0.15, 1.1}, {0.15, 1.3}};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.state_pool = {};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = small_spec();
  spec.n_paths = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.n_steps = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.dt_seconds = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.s0 = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("drawn chains follow the redraw schedule") {
  const DatasetSpec spec = small_spec();
  const auto chain = datagen::draw_chain(spec, RngSpec{55, 1});

  CHECK_EQ(chain.states.size(), 2);
  CHECK_LT(chain.initial_state, 2);
  REQUIRE_EQ(chain.schedule.size(), 4);  // steps 0, 30, 60, 90
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& stage = chain.schedule[s];
    CHECK_EQ(stage.start_step, 30 * s);
    REQUIRE_EQ(stage.matrix.size(), 4);
    for (std::size_t row = 0; row < 2; ++row) {
      const double diag = stage.matrix[row * 2 + row];
      const double off = stage.matrix[row * 2 + (1 - row)];
      CHECK_GE(diag, spec.schedule.persistence_lo);
      CHECK_LE(diag, spec.schedule.persistence_hi);
      CHECK_EQ(off, doctest::Approx(1.0 - diag).epsilon(1e-15));
    }
  }

  // Fresh uniforms per stage: persistence actually varies along the path.
  bool varies = false;
  for (std::size_t s = 1; s < 4; ++s)
    if (chain.schedule[s].matrix[0] != chain.schedule[0].matrix[0]) varies = true;
  CHECK(varies);

  CHECK_EQ(datagen::draw_chain(spec, RngSpec{55, 1}).schedule[2].matrix,
           chain.schedule[2].matrix);
}

TEST_CASE("off-diagonal mass splits evenly for wider pools") {
  DatasetSpec spec = small_spec();
  spec.state_pool = {{0.15, 0.9}, {0.15, 1.1}, {0.2, 1.4}};
  const auto chain = datagen::draw_chain(spec, RngSpec{56, 0});
  for (const auto& stage : chain.schedule) {
    REQUIRE_EQ(stage.matrix.size(), 9);
    for (std::size_t row = 0; row < 3; ++row) {
      double sum = 0.0;
      for (std::size_t col = 0; col < 3; ++col) sum += stage.matrix[row * 3 + col];
      CHECK_EQ(sum, doctest::Approx(1.0).epsilon(1e-14));
      const std::size_t other = row == 0 ? 1 : 0;
      const std::size_t third = row == 2 ? 1 : 2;
      CHECK_EQ(stage.matrix[row * 3 + other], stage.matrix[row * 3 + third]);
    }
  }
}

TEST_CASE("corpus shape, labels and determinism") {
  const DatasetSpec spec = small_spec();
  const auto corpus = datagen::generate_dataset(spec);
  REQUIRE_EQ(corpus.size(), 4);

  for (const auto& item : corpus) {
    REQUIRE_EQ(item.path.prices.size(), 101);
    REQUIRE(item.path.regime_ids.has_value());
    REQUIRE_EQ(item.path.regime_ids->size(), 101);
    REQUIRE_EQ(item.labels.size(), 101);
    CHECK_EQ(item.path.dt, 120.0);
    CHECK_EQ(item.path.timestamp(0), 0);

    // Labels must mirror the recorded regime's exponent at every step.
    for (std::size_t t = 0; t <= 100; ++t) {
      const auto& params = spec.state_pool[(*item.path.regime_ids)[t]];
      CHECK_EQ(item.labels[t], params.exponent <= 1.0 ? 1 : 0);
    }
  }

  CHECK(same_corpus(corpus, datagen::generate_dataset(spec)));

  // Paths are genuinely distinct draws.
  CHECK_NE(corpus[0].path.prices, corpus[1].path.prices);
  CHECK_NE(corpus[1].path.prices, corpus[2].path.prices);
}

TEST_CASE("a longer corpus extends a shorter one") {
  DatasetSpec spec = small_spec();
  spec.n_paths = 2;
  const auto small = datagen::generate_dataset(spec);
  spec.n_paths = 4;
  const auto large = datagen::generate_dataset(spec);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK_EQ(small[k].path.prices, large[k].path.prices);
    CHECK_EQ(small[k].labels, large[k].labels);
  }
}

TEST_CASE("generation is thread-count independent") {
  const DatasetSpec spec = small_spec();
  set_max_threads(1);
  const auto seq = datagen::generate_dataset(spec);
  set_max_threads(4);
  const auto par = datagen::generate_dataset(spec);
  set_max_threads(1);
  CHECK(same_corpus(seq, par));
}

TEST_CASE("initial regimes spread uniformly over the pool") {
  DatasetSpec spec = small_spec();
  spec.state_pool = {{0.15, 0.9}, {0.15, 1.1}, {0.2, 1.4}};
  spec.n_paths = 300;
  spec.n_steps = 1;
  const auto corpus = datagen::generate_dataset(spec);

  std::vector<int> counts(3, 0);
  for (const auto& item : corpus) ++counts[(*item.path.regime_ids)[0]];
  // 4 sigma around 100 for binomial(300, 1/3).
  for (int c : counts) {
    CHECK_GT(c, 67);
    CHECK_LT(c, 133);
  }
}

}  // TEST_SUITE
