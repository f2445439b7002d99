#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bubblelab/martingale.hpp"
#include "bubblelab/rng.hpp"
#include "bubblelab/sim.hpp"

namespace bubblelab::backtest {

// Replaces log returns further than k rolling MADs from the rolling median
// (trailing window of the most recent `window` returns, current included)
// with that median, then rebuilds prices from the first one. Requires
// positive prices and at least window + 1 of them.
sim::PricePath jump_truncate(const sim::PricePath& path, double k,
                             std::size_t window = sim::kStepsPerTradingDay);

struct MarketPanel {
  std::int64_t t0 = 0;
  double dt = 0.0;  // seconds per step
  std::vector<std::string> asset_names;
  std::vector<std::vector<double>> asset_prices;  // one series per asset
  std::vector<double> index_prices;

  std::size_t n_steps() const { return index_prices.size(); }
  void validate() const;
};

struct BacktestConfig {
  std::size_t rebalance_stride = sim::kStepsPerTradingDay;
  double short_cap = 100.0;  // dollars shorted per bubble asset
  double fee_rate = 0.0;     // proportional cost per traded dollar

  void validate() const;
};

struct RebalanceRecord {
  std::size_t step = 0;
  std::vector<double> short_shares;  // per asset, 0 when not shorted
  double index_shares = 0.0;
  std::size_t n_bubble_assets = 0;
};

struct ShortCloseEvent {
  std::size_t step = 0;
  std::size_t asset = 0;  // short closed at full gain: price hit 0
};

struct PortfolioLedger {
  std::vector<double> value;         // per step; starts at 0
  std::vector<double> gross_short;   // per step, marked at current prices
  std::vector<double> gross_long;    // per step
  std::vector<std::size_t> n_bubble_assets;  // per step, as of last rebalance
  std::vector<RebalanceRecord> rebalances;
  std::vector<ShortCloseEvent> events;
  double final_pnl = 0.0;
};

// Zero-net-exposure long-short strategy: at every rebalance step, close all
// positions, short short_cap dollars of each asset labeled 0 and buy the
// index for the total shorted. Signals must align with the panel; the last
// step only liquidates. Shorted assets whose price hits 0 are closed at full
// gain immediately and logged.
PortfolioLedger run_backtest(const MarketPanel& panel,
                             const std::vector<martingale::LabelSeries>& signals,
                             const BacktestConfig& cfg = {});

// Multi-asset market with a common Gaussian factor: every asset's per-step
// innovation is sqrt(corr) * factor + sqrt(1-corr) * idiosyncratic, diffusion
// from its own regime chain plus drift. Asset i uses chain_pool[i % size].
// The index is the equal-weight average of asset prices.
struct MarketSpec {
  std::size_t n_assets = 0;
  double drift_per_year = 0.0;
  std::vector<sim::RegimeChainSpec> chain_pool;
  double correlation = 0.0;  // [0, 1)
  std::size_t n_steps = 0;
  double dt_years = 0.0;
  double s0 = 1.0;
  RngSpec rng{};

  void validate() const;
};

struct MarketResult {
  MarketPanel panel;
  std::vector<martingale::LabelSeries> asset_labels;  // ground truth per asset
};

// Factor draws come from substream rng.offset(0) and asset i from
// rng.offset(1 + i), so assets can be simulated concurrently with results
// identical to sequential execution.
MarketResult simulate_market_p(const MarketSpec& spec);

}  // namespace bubblelab::backtest
