#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bubblelab/backtest.hpp"
#include "bubblelab/datagen.hpp"
#include "bubblelab/io.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace bubblelab;
using bubblelab::testing::TempDir;

namespace {

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& file, const std::string& content) {
  std::ofstream out(file, std::ios::trunc | std::ios::binary);
  out << content;
}

sim::PricePath sample_path(bool with_regimes) {
  sim::PricePath path;
  path.t0 = 1000;
  path.dt = 120.0;
  path.prices = {1.0, 1.0 / 3.0, 0.7071067811865476, 2.5, 0.0};
  if (with_regimes) path.regime_ids = std::vector<int>{0, 0, 1, 1, 0};
  return path;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double survives a parse round trip") {
  for (const double v : {1.0, 1.0 / 3.0, 1e-300, -2.5e17, 0.1, 5896800.0}) {
    const std::string s = io::format_double(v);
    CHECK_EQ(std::stod(s), v);
  }
  CHECK_EQ(io::format_double(1.0), "1");
  CHECK_EQ(io::format_double(0.5), "0.5");
}

TEST_CASE("price path csv round trips exactly") {
  TempDir tmp;
  const auto path = sample_path(true);
  const std::string file = tmp.file("path.csv");
  io::write_price_path_csv(file, path);

  const auto back = io::read_price_path_csv(file);
  CHECK_EQ(back.prices, path.prices);
  CHECK_EQ(back.t0, 1000);
  CHECK_EQ(back.dt, 120.0);
  REQUIRE(back.regime_ids.has_value());
  CHECK_EQ(*back.regime_ids, *path.regime_ids);

  // Fixed content: timestamps advance by dt from t0.
  const std::string text = slurp(file);
  CHECK_NE(text.find("t,price,regime\n1000,1,0\n1120,"), std::string::npos);
}

TEST_CASE("regime column is optional but all-or-none") {
  TempDir tmp;
  const auto path = sample_path(false);
  const std::string file = tmp.file("path.csv");
  io::write_price_path_csv(file, path);
  const auto back = io::read_price_path_csv(file);
  CHECK_EQ(back.prices, path.prices);
  CHECK_FALSE(back.regime_ids.has_value());

  spit(file, "t,price,regime\n0,1.0,0\n120,1.1,\n");
  CHECK_THROWS_AS(io::read_price_path_csv(file), std::invalid_argument);
  spit(file, "t,price,regime\n0,1.0,\n120,1.1,1\n");
  CHECK_THROWS_AS(io::read_price_path_csv(file), std::invalid_argument);
}

TEST_CASE("fractional dt is recovered from the span") {
  TempDir tmp;
  sim::PricePath path;
  path.t0 = 100;
  path.dt = 2.5;
  path.prices = {1.0, 1.1, 0.9, 1.2, 1.05};
  const std::string file = tmp.file("path.csv");
  io::write_price_path_csv(file, path);
  const auto back = io::read_price_path_csv(file);
  CHECK_EQ(back.dt, 2.5);
  CHECK_EQ(back.t0, 100);
}

TEST_CASE("price path reader rejects malformed files") {
  TempDir tmp;
  const std::string file = tmp.file("bad.csv");

  spit(file, "time,price,regime\n0,1.0,\n");
  CHECK_THROWS_AS(io::read_price_path_csv(file), std::invalid_argument);
  spit(file, "t,price,regime\n0,1.0\n");
  CHECK_THROWS_AS(io::read_price_path_csv(file), std::invalid_argument);
  spit(file, "t,price,regime\n0,one,\n120,1.0,\n");
  CHECK_THROWS_AS(io::read_price_path_csv(file), std::invalid_argument);
  spit(file, "t,price,regime\n0,-1.0,\n120,1.0,\n");
  CHECK_THROWS_AS(io::read_price_path_csv(file), std::invalid_argument);
  spit(file, "t,price,regime\n0,1.0,\n0,1.1,\n");
  CHECK_THROWS_AS(io::read_price_path_csv(file), std::invalid_argument);
  spit(file, "t,price,regime\n0,1.0,\n");
  CHECK_THROWS_AS(io::read_price_path_csv(file), std::invalid_argument);
  CHECK_THROWS_AS(io::read_price_path_csv(tmp.file("missing.csv")),
                  std::invalid_argument);
}

TEST_CASE("label csv round trips through both writers") {
  TempDir tmp;
  const auto path = sample_path(false);
  const martingale::LabelSeries labels{1, 1, 0, 0, 1};

  const std::string by_path = tmp.file("labels_a.csv");
  io::write_labels_csv(by_path, path, labels);
  const auto [ts, read_labels] = io::read_labels_csv_full(by_path);
  CHECK_EQ(read_labels, labels);
  REQUIRE_EQ(ts.size(), 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK_EQ(ts[i], path.timestamp(i));

  const std::string by_ts = tmp.file("labels_b.csv");
  io::write_labels_csv(by_ts, ts, labels);
  CHECK_EQ(slurp(by_ts), slurp(by_path));
  CHECK_EQ(io::read_labels_csv(by_ts), labels);

  CHECK_THROWS_AS(io::write_labels_csv(by_ts, path, martingale::LabelSeries{1, 0}),
                  std::invalid_argument);
}

TEST_CASE("label reader rejects malformed files") {
  TempDir tmp;
  const std::string file = tmp.file("labels.csv");
  spit(file, "t,label\n0,2\n");
  CHECK_THROWS_AS(io::read_labels_csv(file), std::invalid_argument);
  spit(file, "t,label\n5,1\n5,0\n");
  CHECK_THROWS_AS(io::read_labels_csv(file), std::invalid_argument);
  spit(file, "t,label\n");
  CHECK_THROWS_AS(io::read_labels_csv(file), std::invalid_argument);
  spit(file, "wrong\n0,1\n");
  CHECK_THROWS_AS(io::read_labels_csv(file), std::invalid_argument);
}

TEST_CASE("xy csv round trips exactly") {
  TempDir tmp;
  const std::vector<std::pair<double, double>> xy{
      {0.1, 1.0 / 7.0}, {2.5, 3.14159265358979312}, {100.0, 1e-12}};
  const std::string file = tmp.file("xy.csv");
  io::write_xy_csv(file, xy);
  CHECK_EQ(io::read_xy_csv(file), xy);

  spit(file, "x,b\n1.0\n");
  CHECK_THROWS_AS(io::read_xy_csv(file), std::invalid_argument);
  spit(file, "x,b\n1.0,abc\n");
  CHECK_THROWS_AS(io::read_xy_csv(file), std::invalid_argument);
}

TEST_CASE("panel csv round trips exactly") {
  TempDir tmp;
  backtest::MarketPanel panel;
  panel.t0 = 500;
  panel.dt = 60.0;
  panel.asset_names = {"A0", "A1"};
  panel.asset_prices = {{1.0, 0.9, 0.0}, {1.0, 1.1, 1.2}};
  panel.index_prices = {1.0, 1.0, 0.6};

  const std::string file = tmp.file("panel.csv");
  io::write_panel_csv(file, panel);
  const auto back = io::read_panel_csv(file);
  CHECK_EQ(back.asset_names, panel.asset_names);
  CHECK_EQ(back.asset_prices, panel.asset_prices);
  CHECK_EQ(back.index_prices, panel.index_prices);
  CHECK_EQ(back.t0, 500);
  CHECK_EQ(back.dt, 60.0);

  spit(file, "t,A0\n0,1.0\n60,1.0\n");
  CHECK_THROWS_AS(io::read_panel_csv(file), std::invalid_argument);
  spit(file, "t,A0,INDEX\n0,1.0\n60,1.0\n");
  CHECK_THROWS_AS(io::read_panel_csv(file), std::invalid_argument);
  spit(file, "t,A0,INDEX\n0,1.0,1.0\n");
  CHECK_THROWS_AS(io::read_panel_csv(file), std::invalid_argument);
}

TEST_CASE("ledger csv lays out the analytic example") {
  TempDir tmp;
  backtest::MarketPanel panel;
  panel.dt = 120.0;
  panel.asset_names = {"A0"};
  panel.asset_prices = {{1.0, 0.9, 0.9}};
  panel.index_prices = {1.0, 1.0, 1.0};
  backtest::BacktestConfig cfg;
  cfg.rebalance_stride = 10;
  const auto ledger = backtest::run_backtest(panel, {martingale::LabelSeries(3, 0)}, cfg);

  const std::string file = tmp.file("ledger.csv");
  io::write_ledger_csv(file, panel, ledger);
  CHECK_EQ(slurp(file),
           "t,portfolio_value,gross_short,gross_long,n_bubble_assets\n"
           "0,0,100,100,1\n"
           "120,10,90,100,1\n"
           "240,10,0,0,0\n");

  backtest::PortfolioLedger short_ledger = ledger;
  short_ledger.value.pop_back();
  CHECK_THROWS_AS(io::write_ledger_csv(file, panel, short_ledger), std::invalid_argument);
}

TEST_CASE("training log csv is one line per epoch") {
  TempDir tmp;
  const std::vector<nnet::EpochStats> history{{0.5, 0.75}, {0.25, 1.0}};
  const std::string file = tmp.file("log.csv");
  io::write_training_log_csv(file, history);
  CHECK_EQ(slurp(file), "epoch,loss,accuracy\n1,0.5,0.75\n2,0.25,1\n");
}

TEST_CASE("kv files keep order and tolerate comments") {
  TempDir tmp;
  const io::KvPairs kv{{"alpha", "1"}, {"beta", "two"}, {"alpha", "3"}};
  const std::string file = tmp.file("conf");
  io::write_kv_file(file, kv);
  CHECK_EQ(io::read_kv_file(file), kv);

  spit(file, "# comment\n\nalpha=1\nbeta=b=c\n");
  const auto read = io::read_kv_file(file);
  REQUIRE_EQ(read.size(), 2);
  CHECK_EQ(read[0].first, "alpha");
  CHECK_EQ(read[1].second, "b=c");  // split at the first '='

  spit(file, "no_equals_here\n");
  CHECK_THROWS_AS(io::read_kv_file(file), std::invalid_argument);
}

TEST_CASE("hmm spec round trips and rejects junk") {
  TempDir tmp;
  estimator::HmmSpec spec;
  spec.transition = {0.97, 0.03, 0.06, 0.94};
  spec.emission = {0.81, 0.19, 0.23, 0.77};
  spec.initial = {0.4, 0.6};

  const std::string file = tmp.file("hmm");
  io::write_hmm_spec(file, spec);
  const auto back = io::read_hmm_spec(file);
  CHECK_EQ(back.transition, spec.transition);
  CHECK_EQ(back.emission, spec.emission);
  CHECK_EQ(back.initial, spec.initial);

  spit(file, "transition=0.9,0.1,0.1,0.9\nemission=0.8,0.2,0.2,0.8\n");
  CHECK_THROWS_AS(io::read_hmm_spec(file), std::invalid_argument);  // missing initial
  spit(file,
       "transition=0.9,0.1,0.1,0.9\nemission=0.8,0.2,0.2,0.8\ninitial=0.5,0.5\n"
       "extra=1\n");
  CHECK_THROWS_AS(io::read_hmm_spec(file), std::invalid_argument);
  spit(file, "transition=0.9,0.1,0.1\nemission=0.8,0.2,0.2,0.8\ninitial=0.5,0.5\n");
  CHECK_THROWS_AS(io::read_hmm_spec(file), std::invalid_argument);
  spit(file, "transition=0.9,0.2,0.1,0.9\nemission=0.8,0.2,0.2,0.8\ninitial=0.5,0.5\n");
  CHECK_THROWS_AS(io::read_hmm_spec(file), std::invalid_argument);  // row sum
}

TEST_CASE("corpus directories round trip") {
  TempDir tmp;
  datagen::DatasetSpec spec;
  spec.n_paths = 2;
  spec.n_steps = 30;
  spec.dt_seconds = 120.0;
  spec.s0 = 1.0;
  spec.state_pool = {{0.15, 0.9}, {0.15, 1.2}};
  spec.schedule.persistence_lo = 0.9;
  spec.schedule.persistence_hi = 0.99;
  spec.schedule.redraw_interval = 10;
  spec.rng = RngSpec{321, 7};
  const auto corpus = datagen::generate_dataset(spec);

  const std::string dir = tmp.file("corpus");
  io::write_corpus(dir, corpus, spec);
  const auto back = io::read_corpus(dir);

  CHECK_EQ(back.spec.n_paths, 2);
  CHECK_EQ(back.spec.n_steps, 30);
  CHECK_EQ(back.spec.dt_seconds, 120.0);
  CHECK_EQ(back.spec.s0, 1.0);
  REQUIRE_EQ(back.spec.state_pool.size(), 2);
  CHECK_EQ(back.spec.state_pool[0].scale, 0.15);
  CHECK_EQ(back.spec.state_pool[1].exponent, 1.2);
  CHECK_EQ(back.spec.schedule.persistence_lo, 0.9);
  CHECK_EQ(back.spec.schedule.persistence_hi, 0.99);
  CHECK_EQ(back.spec.schedule.redraw_interval, 10);
  CHECK_EQ(back.spec.rng.seed, 321);
  CHECK_EQ(back.spec.rng.stream, 7);

  REQUIRE_EQ(back.items.size(), 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK_EQ(back.items[k].path.prices, corpus[k].path.prices);
    CHECK_EQ(back.items[k].labels, corpus[k].labels);
    REQUIRE(back.items[k].path.regime_ids.has_value());
    CHECK_EQ(*back.items[k].path.regime_ids, *corpus[k].path.regime_ids);
  }

  CHECK_THROWS_AS(io::write_corpus(dir, corpus, [&] {
                    auto wrong = spec;
                    wrong.n_paths = 3;
                    return wrong;
                  }()),
                  std::invalid_argument);
}

TEST_CASE("corpus manifest is strict") {
  TempDir tmp;
  datagen::DatasetSpec spec;
  spec.n_paths = 1;
  spec.n_steps = 10;
  spec.state_pool = {{0.15, 0.9}, {0.15, 1.2}};
  spec.schedule.persistence_lo = 0.9;
  spec.schedule.persistence_hi = 0.99;
  spec.schedule.redraw_interval = 5;
  spec.rng = RngSpec{1, 0};
  const auto corpus = datagen::generate_dataset(spec);
  const std::string dir = tmp.file("corpus");
  io::write_corpus(dir, corpus, spec);

  const std::string manifest = dir + "/manifest";
  const std::string original = slurp(manifest);

  spit(manifest, original + "mystery=1\n");
  CHECK_THROWS_AS(io::read_corpus(dir), std::invalid_argument);

  std::string bumped = original;
  const auto pos = bumped.find("format_version=1");
  REQUIRE_NE(pos, std::string::npos);
  bumped.replace(pos, 16, "format_version=9");
  spit(manifest, bumped);
  CHECK_THROWS_AS(io::read_corpus(dir), std::invalid_argument);

  std::string without = original;
  without.erase(without.find("format_version=1"), 17);
  spit(manifest, without);
  CHECK_THROWS_AS(io::read_corpus(dir), std::invalid_argument);
}

TEST_CASE("fnv1a matches the published test vectors") {
  CHECK_EQ(io::fnv1a(""), 14695981039346656037ULL);
  CHECK_EQ(io::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  CHECK_EQ(io::fnv1a("foobar"), 0x85944171f73967e8ULL);
  CHECK_EQ(io::hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
  CHECK_EQ(io::hex64(0), "0000000000000000");

  TempDir tmp;
  const std::string file = tmp.file("blob");
  spit(file, "foobar");
  CHECK_EQ(io::fnv1a_file(file), 0x85944171f73967e8ULL);
}

TEST_CASE("config digest appends a hash over the canonical text") {
  TempDir tmp;
  const io::KvPairs kv{{"a", "1"}, {"b", "2"}};
  io::write_config_digest(tmp.path(), "demo", kv);

  const std::string expected = io::hex64(io::fnv1a("a=1\nb=2\n"));
  CHECK_EQ(slurp(tmp.file("demo_config.txt")),
           "a=1\nb=2\nconfig_digest=" + expected + "\n");
}

}  // TEST_SUITE
