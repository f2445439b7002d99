#include "bubblelab/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bubblelab/parallel.hpp"

namespace bubblelab::backtest {

namespace {

double median_of(std::vector<double>& scratch) {
  const std::size_t n = scratch.size();
  const std::size_t mid = n / 2;
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<long>(mid), scratch.end());
  double m = scratch[mid];
  if (n % 2 == 0) {
    const double lo = *std::max_element(scratch.begin(), scratch.begin() + static_cast<long>(mid));
    m = 0.5 * (lo + m);
  }
  return m;
}

}  // namespace

sim::PricePath jump_truncate(const sim::PricePath& path, double k, std::size_t window) {
  if (!std::isfinite(k) || k <= 0.0)
    throw std::invalid_argument("jump_truncate: k must be finite and > 0");
  if (window < 8) throw std::invalid_argument("jump_truncate: window must be >= 8");
  const std::size_t n = path.prices.size();
  if (n < window + 1)
    throw std::invalid_argument("jump_truncate: path shorter than the window");

  std::vector<double> returns(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = path.prices[i];
    const double b = path.prices[i + 1];
    if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0)
      throw std::invalid_argument("jump_truncate: prices must be finite and > 0");
    returns[i] = std::log(b / a);
  }

  std::vector<double> filtered = returns;
  std::vector<double> scratch;
  scratch.reserve(window);
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    scratch.assign(returns.begin() + static_cast<long>(lo),
                   returns.begin() + static_cast<long>(i + 1));
    const double med = median_of(scratch);
    for (double& v : scratch) v = std::abs(v - med);
    const double mad = median_of(scratch);
    if (std::abs(returns[i] - med) > k * mad) filtered[i] = med;
  }

  sim::PricePath out;
  out.t0 = path.t0;
  out.dt = path.dt;
  out.regime_ids = path.regime_ids;
  out.prices.resize(n);
  out.prices[0] = path.prices[0];
  for (std::size_t i = 1; i < n; ++i)
    out.prices[i] = out.prices[i - 1] * std::exp(filtered[i - 1]);
  return out;
}

void MarketPanel::validate() const {
  const std::size_t len = index_prices.size();
  if (len < 2) throw std::invalid_argument("MarketPanel: need at least 2 steps");
  if (asset_prices.empty()) throw std::invalid_argument("MarketPanel: no assets");
  if (asset_names.size() != asset_prices.size())
    throw std::invalid_argument("MarketPanel: name/series count mismatch");
  if (!std::isfinite(dt) || dt <= 0.0)
    throw std::invalid_argument("MarketPanel: dt must be finite and > 0");
  for (const auto& series : asset_prices) {
    if (series.size() != len)
      throw std::invalid_argument("MarketPanel: asset series length mismatch");
    for (double p : series)
      if (!std::isfinite(p) || p < 0.0)
        throw std::invalid_argument("MarketPanel: asset prices must be finite and >= 0");
  }
  for (double p : index_prices)
    if (!std::isfinite(p) || p <= 0.0)
      throw std::invalid_argument("MarketPanel: index prices must be finite and > 0");
}

void BacktestConfig::validate() const {
  if (rebalance_stride == 0)
    throw std::invalid_argument("BacktestConfig: rebalance_stride must be >= 1");
  if (!std::isfinite(short_cap) || short_cap <= 0.0)
    throw std::invalid_argument("BacktestConfig: short_cap must be finite and > 0");
  if (!std::isfinite(fee_rate) || fee_rate < 0.0)
    throw std::invalid_argument("BacktestConfig: fee_rate must be finite and >= 0");
}

PortfolioLedger run_backtest(const MarketPanel& panel,
                             const std::vector<martingale::LabelSeries>& signals,
                             const BacktestConfig& cfg) {
  panel.validate();
  cfg.validate();
  const std::size_t n_assets = panel.asset_prices.size();
  const std::size_t n = panel.n_steps();
  if (signals.size() != n_assets)
    throw std::invalid_argument("run_backtest: one signal series per asset required");
  for (const auto& s : signals) {
    if (s.size() != n) throw std::invalid_argument("run_backtest: signal length mismatch");
    for (int v : s)
      if (v != 0 && v != 1)
        throw std::invalid_argument("run_backtest: signals must be 0 or 1");
  }

  PortfolioLedger ledger;
  ledger.value.resize(n);
  ledger.gross_short.resize(n);
  ledger.gross_long.resize(n);
  ledger.n_bubble_assets.resize(n);

  double cash = 0.0;
  std::vector<double> short_shares(n_assets, 0.0);
  double index_shares = 0.0;
  std::size_t held_bubbles = 0;

  for (std::size_t t = 0; t < n; ++t) {
    // A shorted asset absorbed at 0 owes nothing: the position closes at
    // full gain with no cash movement.
    for (std::size_t a = 0; a < n_assets; ++a) {
      if (short_shares[a] != 0.0 && panel.asset_prices[a][t] == 0.0) {
        short_shares[a] = 0.0;
        ledger.events.push_back(ShortCloseEvent{t, a});
      }
    }

    const bool last = t + 1 == n;
    if (t % cfg.rebalance_stride == 0 || last) {
      // Close everything at current prices.
      for (std::size_t a = 0; a < n_assets; ++a) {
        if (short_shares[a] != 0.0) {
          const double cost = short_shares[a] * panel.asset_prices[a][t];
          cash -= cost + cfg.fee_rate * cost;
          short_shares[a] = 0.0;
        }
      }
      if (index_shares != 0.0) {
        const double proceeds = index_shares * panel.index_prices[t];
        cash += proceeds - cfg.fee_rate * proceeds;
        index_shares = 0.0;
      }
      held_bubbles = 0;

      if (!last) {
        double shorted = 0.0;
        for (std::size_t a = 0; a < n_assets; ++a) {
          if (signals[a][t] == 0 && panel.asset_prices[a][t] > 0.0) {
            short_shares[a] = cfg.short_cap / panel.asset_prices[a][t];
            cash += cfg.short_cap - cfg.fee_rate * cfg.short_cap;
            shorted += cfg.short_cap;
            ++held_bubbles;
          }
        }
        if (shorted > 0.0) {
          index_shares = shorted / panel.index_prices[t];
          cash -= shorted + cfg.fee_rate * shorted;
        }

        // Net exposure at open must vanish relative to gross.
        double short_val = 0.0;
        for (std::size_t a = 0; a < n_assets; ++a)
          short_val += short_shares[a] * panel.asset_prices[a][t];
        const double long_val = index_shares * panel.index_prices[t];
        const double gross = short_val + long_val;
        if (gross > 0.0 && std::abs(long_val - short_val) > 1e-9 * gross)
          throw std::logic_error("run_backtest: net exposure out of tolerance");

        RebalanceRecord rec;
        rec.step = t;
        rec.short_shares = short_shares;
        rec.index_shares = index_shares;
        rec.n_bubble_assets = held_bubbles;
        ledger.rebalances.push_back(std::move(rec));
      }
    }

    double gross_short = 0.0;
    for (std::size_t a = 0; a < n_assets; ++a)
      gross_short += short_shares[a] * panel.asset_prices[a][t];
    const double gross_long = index_shares * panel.index_prices[t];
    ledger.gross_short[t] = gross_short;
    ledger.gross_long[t] = gross_long;
    ledger.value[t] = cash + gross_long - gross_short;
    ledger.n_bubble_assets[t] = held_bubbles;
  }

  ledger.final_pnl = ledger.value.back();
  return ledger;
}

void MarketSpec::validate() const {
  if (n_assets == 0) throw std::invalid_argument("MarketSpec: n_assets must be >= 1");
  if (n_steps == 0) throw std::invalid_argument("MarketSpec: n_steps must be >= 1");
  if (chain_pool.empty()) throw std::invalid_argument("MarketSpec: empty chain pool");
  for (const auto& chain : chain_pool) chain.validate();
  if (!std::isfinite(correlation) || correlation < 0.0 || correlation >= 1.0)
    throw std::invalid_argument("MarketSpec: correlation must lie in [0, 1)");
  if (!std::isfinite(drift_per_year))
    throw std::invalid_argument("MarketSpec: drift must be finite");
  if (!std::isfinite(dt_years) || dt_years <= 0.0)
    throw std::invalid_argument("MarketSpec: dt must be finite and > 0");
  if (!std::isfinite(s0) || s0 <= 0.0)
    throw std::invalid_argument("MarketSpec: s0 must be finite and > 0");
}

MarketResult simulate_market_p(const MarketSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_steps + 1;

  std::vector<double> factor(spec.n_steps);
  {
    Pcg64 gen(spec.rng.offset(0));
    for (double& f : factor) f = gen.normal();
  }
  const double w_common = std::sqrt(spec.correlation);
  const double w_idio = std::sqrt(1.0 - spec.correlation);

  MarketResult result;
  result.panel.t0 = 0;
  result.panel.dt = spec.dt_years * sim::kTradingSecondsPerYear;
  result.panel.asset_prices.assign(spec.n_assets, {});
  result.panel.asset_names.resize(spec.n_assets);
  result.asset_labels.assign(spec.n_assets, {});

  parallel_for(spec.n_assets, [&](std::size_t a) {
    const auto& chain = spec.chain_pool[a % spec.chain_pool.size()];
    const std::size_t k = chain.states.size();
    Pcg64 gen(spec.rng.offset(1 + a));

    auto& prices = result.panel.asset_prices[a];
    auto& labels = result.asset_labels[a];
    prices.resize(n);
    labels.resize(n);
    prices[0] = spec.s0;
    std::size_t regime = chain.initial_state;
    labels[0] = chain.states[regime].exponent <= 1.0 ? 1 : 0;

    for (std::size_t t = 0; t < spec.n_steps; ++t) {
      const double z = gen.normal();
      const double eps = w_common * factor[t] + w_idio * z;
      const double s = prices[t];
      const double diffusion =
          s > 0.0 ? sim::diffusion_term(s, chain.states[regime], spec.dt_years) : 0.0;
      const double next = s + spec.drift_per_year * s * spec.dt_years + diffusion * eps;
      prices[t + 1] = next > 0.0 ? next : 0.0;
      if (k > 1) {
        const double u = gen.uniform();
        regime = sim::sample_transition(chain.matrix_at(t), k, regime, u);
      }
      labels[t + 1] = chain.states[regime].exponent <= 1.0 ? 1 : 0;
    }
    result.panel.asset_names[a] = "A" + std::to_string(a);
  });

  result.panel.index_prices.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    for (std::size_t a = 0; a < spec.n_assets; ++a)
      sum += result.panel.asset_prices[a][t];
    result.panel.index_prices[t] = sum / static_cast<double>(spec.n_assets);
  }
  return result;
}

}  // namespace bubblelab::backtest
