#include "bubblelab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bubblelab/parallel.hpp"

namespace bubblelab::estimator {

void GridSpec::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo <= 0.5 || hi <= lo)
    throw std::invalid_argument("GridSpec: need 0.5 < lo < hi");
  if (points < 2) throw std::invalid_argument("GridSpec: need at least 2 grid points");
}

void RollingConfig::validate() const {
  grid.validate();
  if (window_len < 32) throw std::invalid_argument("RollingConfig: window_len must be >= 32");
  if (stride == 0 || stride > window_len)
    throw std::invalid_argument("RollingConfig: stride must be in [1, window_len]");
}

namespace {

// Mean squared residual of the window objective at a given exponent, with the
// scale^2 factor profiled out in closed form.
struct WindowData {
  std::vector<double> log_s;  // log S_{t_{i-1}}
  std::vector<double> y;      // (dS_i)^2 / dt
};

double objective_at(const WindowData& d, double exponent, double* scale_sq_out) {
  const std::size_t n = d.y.size();
  double saa = 0.0, say = 0.0;
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::exp(2.0 * exponent * d.log_s[i]);
    saa += a[i] * a[i];
    say += a[i] * d.y[i];
  }
  double scale_sq = saa > 0.0 ? say / saa : 0.0;
  if (scale_sq < 0.0) scale_sq = 0.0;
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = scale_sq * a[i] - d.y[i];
    obj += r * r;
  }
  if (scale_sq_out) *scale_sq_out = scale_sq;
  return obj / static_cast<double>(n);
}

}  // namespace

WindowFit fit_power_window(std::span<const double> prices, double dt,
                           const GridSpec& grid) {
  grid.validate();
  if (prices.size() < 32)
    throw std::invalid_argument("fit_power_window: need at least 32 prices");
  if (!std::isfinite(dt) || dt <= 0.0)
    throw std::invalid_argument("fit_power_window: dt must be finite and > 0");

  const std::size_t n = prices.size() - 1;
  WindowData d;
  d.log_s.resize(n);
  d.y.resize(n);
  bool any_move = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = prices[i];
    if (!std::isfinite(s) || s <= 0.0 || !std::isfinite(prices[i + 1]))
      throw std::invalid_argument("fit_power_window: prices must be finite and > 0");
    const double ds = prices[i + 1] - s;
    d.log_s[i] = std::log(s);
    d.y[i] = ds * ds / dt;
    if (ds != 0.0) any_move = true;
  }
  if (prices.back() <= 0.0)
    throw std::invalid_argument("fit_power_window: prices must be finite and > 0");

  if (!any_move) {
    // All increments vanish: any exponent fits with scale 0.
    WindowFit fit;
    fit.degenerate = true;
    return fit;
  }

  const std::size_t m = grid.points;
  double best_obj = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  std::vector<double> gammas(m);
  for (std::size_t j = 0; j < m; ++j) {
    gammas[j] = grid.lo + (grid.hi - grid.lo) * static_cast<double>(j) /
                              static_cast<double>(m - 1);
    const double obj = objective_at(d, gammas[j], nullptr);
    if (obj < best_obj) {
      best_obj = obj;
      best_idx = j;
    }
  }

  // Golden-section refinement inside the bracket around the best grid point.
  double a = gammas[best_idx > 0 ? best_idx - 1 : 0];
  double b = gammas[std::min(best_idx + 1, m - 1)];
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective_at(d, x1, nullptr);
  double f2 = objective_at(d, x2, nullptr);
  while (b - a > 1e-7) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective_at(d, x1, nullptr);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective_at(d, x2, nullptr);
    }
  }

  WindowFit fit;
  fit.exponent = 0.5 * (a + b);
  double scale_sq = 0.0;
  fit.objective = objective_at(d, fit.exponent, &scale_sq);
  if (fit.objective > best_obj) {
    // Refinement never accepts a worse point than the grid argmin.
    fit.exponent = gammas[best_idx];
    fit.objective = objective_at(d, fit.exponent, &scale_sq);
  }
  fit.scale = std::sqrt(scale_sq);
  return fit;
}

martingale::LabelSeries rolling_classify(const sim::PricePath& path,
                                         const RollingConfig& cfg) {
  cfg.validate();
  const std::size_t len = path.prices.size();
  if (len < cfg.window_len)
    throw std::invalid_argument("rolling_classify: path shorter than window");

  const double dt = path.dt_years();
  const std::size_t n_windows = (len - cfg.window_len) / cfg.stride + 1;

  std::vector<int> window_label(n_windows);
  parallel_for(n_windows, [&](std::size_t w) {
    const std::size_t begin = w * cfg.stride;
    const auto fit = fit_power_window(
        std::span<const double>(path.prices.data() + begin, cfg.window_len), dt,
        cfg.grid);
    window_label[w] = fit.exponent <= 1.0 ? 1 : 0;
  });

  // Step t takes the most recent window completed by t; leading steps take
  // the first window's label.
  martingale::LabelSeries labels(len);
  std::size_t w = 0;
  for (std::size_t t = 0; t < len; ++t) {
    while (w + 1 < n_windows && (w + 1) * cfg.stride + cfg.window_len <= t + 1) ++w;
    labels[t] = window_label[w];
  }
  return labels;
}

void HmmSpec::validate() const {
  auto check_rows = [](const std::array<double, 4>& m, const char* what) {
    for (double p : m)
      if (!std::isfinite(p) || p < 0.0 || p > 1.0)
        throw std::invalid_argument(std::string("HmmSpec: ") + what +
                                    " entries must lie in [0, 1]");
    if (std::abs(m[0] + m[1] - 1.0) > 1e-12 || std::abs(m[2] + m[3] - 1.0) > 1e-12)
      throw std::invalid_argument(std::string("HmmSpec: ") + what + " rows must sum to 1");
  };
  check_rows(transition, "transition");
  check_rows(emission, "emission");
  for (double p : initial)
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw std::invalid_argument("HmmSpec: initial entries must lie in [0, 1]");
  if (std::abs(initial[0] + initial[1] - 1.0) > 1e-12)
    throw std::invalid_argument("HmmSpec: initial must sum to 1");
}

martingale::LabelSeries hmm_smooth(const martingale::LabelSeries& raw,
                                   const HmmSpec& spec) {
  spec.validate();
  if (raw.empty()) return {};
  for (int v : raw)
    if (v != 0 && v != 1)
      throw std::invalid_argument("hmm_smooth: labels must be 0 or 1");

  const auto lg = [](double p) {
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  };
  const std::size_t t_len = raw.size();

  // Viterbi with backpointers; all comparisons prefer state 1 on ties.
  std::vector<std::array<double, 2>> score(t_len);
  std::vector<std::array<int, 2>> from(t_len);
  for (int h = 0; h < 2; ++h)
    score[0][h] = lg(spec.initial[h]) + lg(spec.emission[h * 2 + raw[0]]);

  for (std::size_t t = 1; t < t_len; ++t) {
    for (int h = 0; h < 2; ++h) {
      const double via1 = score[t - 1][1] + lg(spec.transition[2 + h]);
      const double via0 = score[t - 1][0] + lg(spec.transition[h]);
      int best = 1;
      double best_score = via1;
      if (via0 > via1) {
        best = 0;
        best_score = via0;
      }
      score[t][h] = best_score + lg(spec.emission[h * 2 + raw[t]]);
      from[t][h] = best;
    }
  }

  martingale::LabelSeries out(t_len);
  int h = score[t_len - 1][0] > score[t_len - 1][1] ? 0 : 1;
  out[t_len - 1] = h;
  for (std::size_t t = t_len - 1; t > 0; --t) {
    h = from[t][h];
    out[t - 1] = h;
  }
  return out;
}

}  // namespace bubblelab::estimator
