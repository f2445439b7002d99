#include <stdexcept>
#include <string>
#include <vector>

#include "bubblelab/evalkit.hpp"
#include "bubblelab/rng.hpp"
#include "doctest.h"

using namespace bubblelab;
using evalkit::ConfusionReport;
using martingale::LabelSeries;

namespace {

// Tiny corpus with hand-checkable labels: path 0 all martingale, path 1 all
// bubble, path 2 half and half.
std::vector<datagen::LabeledPath> toy_corpus() {
  std::vector<datagen::LabeledPath> corpus(3);
  for (auto& item : corpus) {
    item.path.dt = 120.0;
    item.path.prices.assign(10, 1.0);
  }
  corpus[0].labels.assign(10, 1);
  corpus[1].labels.assign(10, 0);
  corpus[2].labels.assign(10, 0);
  for (std::size_t t = 5; t < 10; ++t) corpus[2].labels[t] = 1;
  return corpus;
}

}  // namespace

TEST_SUITE("evalkit") {

TEST_CASE("score counts the confusion cells") {
  // 6 truth-martingale steps (4 hit, 2 missed), 4 bubble steps (3 hit, 1 missed).
  const LabelSeries truth{1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
  const LabelSeries pred{1, 1, 1, 1, 0, 0, 0, 0, 0, 1};
  const auto report = evalkit::score(pred, truth);
  CHECK_EQ(report.tm_as_tm, 4);
  CHECK_EQ(report.tm_as_slm, 2);
  CHECK_EQ(report.slm_as_slm, 3);
  CHECK_EQ(report.slm_as_tm, 1);
  CHECK_EQ(report.n_points(), 10);
  CHECK_EQ(report.detection_pct(), doctest::Approx(70.0).epsilon(1e-15));
  CHECK_EQ(report.spurious_pct(), doctest::Approx(30.0).epsilon(1e-15));
}

TEST_CASE("detection and spurious always split 100") {
  Pcg64 gen(31, 0);
  for (int rep = 0; rep < 20; ++rep) {
    LabelSeries truth(50), pred(50);
    for (std::size_t i = 0; i < 50; ++i) {
      truth[i] = gen.uniform() < 0.5 ? 0 : 1;
      pred[i] = gen.uniform() < 0.5 ? 0 : 1;
    }
    const auto report = evalkit::score(pred, truth);
    CHECK_EQ(report.detection_pct() + report.spurious_pct(),
             doctest::Approx(100.0).epsilon(1e-15));
  }
}

TEST_CASE("score validates inputs") {
  CHECK_THROWS_AS(evalkit::score({1, 0}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(evalkit::score({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(evalkit::score({1, 2}, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(evalkit::score({1, 0}, {1, 3}), std::invalid_argument);
}

TEST_CASE("empty report refuses percentages") {
  const ConfusionReport empty;
  CHECK_EQ(empty.n_points(), 0);
  CHECK_THROWS_AS(empty.detection_pct(), std::invalid_argument);
}

TEST_CASE("aggregation matches the per-path sum") {
  const auto corpus = toy_corpus();
  const evalkit::Classifier ones = [](const sim::PricePath& path) {
    return LabelSeries(path.prices.size(), 1);
  };
  const evalkit::Classifier zeros = [](const sim::PricePath& path) {
    return LabelSeries(path.prices.size(), 0);
  };

  const auto report = evalkit::run_comparison(corpus, "ones", ones, "zeros", zeros);
  CHECK_EQ(report.n_paths, 3);
  CHECK_EQ(report.network.name, "ones");
  CHECK_EQ(report.estimator.name, "zeros");
  REQUIRE_EQ(report.network.per_path.size(), 3);

  ConfusionReport sum;
  for (const auto& per : report.network.per_path) sum += per;
  CHECK_EQ(sum.tm_as_tm, report.network.total.tm_as_tm);
  CHECK_EQ(sum.tm_as_slm, report.network.total.tm_as_slm);
  CHECK_EQ(sum.slm_as_slm, report.network.total.slm_as_slm);
  CHECK_EQ(sum.slm_as_tm, report.network.total.slm_as_tm);

  // Truth is 15 martingale and 15 bubble steps in total.
  CHECK_EQ(report.network.total.tm_as_tm, 15);
  CHECK_EQ(report.network.total.slm_as_tm, 15);
  CHECK_EQ(report.network.total.detection_pct(), doctest::Approx(50.0));
  CHECK_EQ(report.estimator.total.slm_as_slm, 15);
  CHECK_EQ(report.estimator.total.tm_as_slm, 15);

  CHECK_GE(report.network.wall_seconds, 0.0);
  CHECK_THROWS_AS(evalkit::run_comparison({}, "a", ones, "b", zeros),
                  std::invalid_argument);
}

TEST_CASE("a perfect classifier scores full detection") {
  const auto corpus = toy_corpus();
  std::size_t next = 0;
  const evalkit::Classifier oracle = [&](const sim::PricePath&) {
    return corpus[next++].labels;
  };
  const evalkit::Classifier zeros = [](const sim::PricePath& path) {
    return LabelSeries(path.prices.size(), 0);
  };
  const auto report = evalkit::run_comparison(corpus, "oracle", oracle, "zeros", zeros);
  CHECK_EQ(report.network.total.detection_pct(), 100.0);
  CHECK_EQ(report.network.total.spurious_pct(), 0.0);
  for (const auto& per : report.network.per_path)
    CHECK_EQ(per.detection_pct(), 100.0);
}

TEST_CASE("report text is stable and timing lines are optional") {
  const auto corpus = toy_corpus();
  const evalkit::Classifier ones = [](const sim::PricePath& path) {
    return LabelSeries(path.prices.size(), 1);
  };
  const auto report = evalkit::run_comparison(corpus, "network", ones,
                                              "parametric_estimator", ones);

  const std::string timed = report.to_text(true);
  const std::string plain = report.to_text(false);
  CHECK_NE(timed.find("network.wall_seconds="), std::string::npos);
  CHECK_EQ(plain.find("wall_seconds"), std::string::npos);
  CHECK_NE(plain.find("n_paths=3"), std::string::npos);
  CHECK_NE(plain.find("n_points=30"), std::string::npos);
  CHECK_NE(plain.find("network.counts=15,0,0,15"), std::string::npos);
  CHECK_NE(plain.find("path_2.network_detection_pct=50"), std::string::npos);

  // Text without timings is a pure function of the counts.
  CHECK_EQ(plain, report.to_text(false));
}

TEST_CASE("training stream overlap is rejected") {
  datagen::DatasetSpec spec;
  spec.n_paths = 3;
  spec.n_steps = 50;
  spec.state_pool = {{0.15, 0.9}, {0.15, 1.2}};
  spec.schedule.persistence_lo = 0.9;
  spec.schedule.persistence_hi = 0.99;
  spec.schedule.redraw_interval = 25;
  spec.rng = RngSpec{500, 10};
  const auto corpus = datagen::generate_dataset(spec);

  Pcg64 gen(1, 0);
  nnet::LstmModel model = nnet::init_model(2, 2, gen);
  model.feature_stats = nnet::FeatureStats{0.0, 0.05};
  estimator::RollingConfig est;
  est.window_len = 32;
  est.stride = 8;

  // Corpus uses streams [10, 16); a training range ending at 11 overlaps.
  evalkit::StreamRange overlap{500, 0, 11};
  CHECK_THROWS_AS(evalkit::compare_methods(corpus, spec, model, est, {}, &overlap),
                  std::invalid_argument);

  // Same streams under a different seed are fine, as is a disjoint range.
  evalkit::StreamRange other_seed{501, 0, 11};
  CHECK_NOTHROW(evalkit::compare_methods(corpus, spec, model, est, {}, &other_seed));
  evalkit::StreamRange disjoint{500, 0, 10};
  const auto report =
      evalkit::compare_methods(corpus, spec, model, est, {}, &disjoint);
  CHECK_EQ(report.n_paths, 3);
  CHECK_EQ(report.network.total.n_points(), 153);
  CHECK_EQ(report.estimator.total.n_points(), 153);
}

}  // TEST_SUITE
