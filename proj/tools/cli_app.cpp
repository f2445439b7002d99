#include "cli_app.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bubblelab/backtest.hpp"
#include "bubblelab/datagen.hpp"
#include "bubblelab/estimator.hpp"
#include "bubblelab/evalkit.hpp"
#include "bubblelab/io.hpp"
#include "bubblelab/martingale.hpp"
#include "bubblelab/nnet.hpp"
#include "bubblelab/parallel.hpp"
#include "bubblelab/sim.hpp"

namespace bubblelab::cli {
namespace {

namespace fs = std::filesystem;

std::uint64_t default_seed() {
  const char* env = std::getenv("BUBBLELAB_SEED");
  if (env == nullptr || *env == '\0') return 42;
  std::uint64_t v = 0;
  std::size_t used = 0;
  try {
    v = std::stoull(env, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("BUBBLELAB_SEED must be an unsigned integer");
  }
  if (used != std::string(env).size())
    throw std::invalid_argument("BUBBLELAB_SEED must be an unsigned integer");
  return v;
}

double parse_real(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": cannot parse '" + text + "' as a real");
  }
}

// "scale:exponent,scale:exponent,..."
std::vector<sim::PowerLawParams> parse_pool(const std::string& text) {
  std::vector<sim::PowerLawParams> pool;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("state pool entries must look like scale:exponent, got '" +
                                  item + "'");
    pool.emplace_back(parse_real(item.substr(0, colon), "pool scale"),
                      parse_real(item.substr(colon + 1), "pool exponent"));
  }
  if (pool.empty()) throw std::invalid_argument("state pool is empty");
  return pool;
}

std::size_t resolve_steps(std::int64_t steps, double years, double dt_seconds) {
  if (steps > 0) return static_cast<std::size_t>(steps);
  if (!(years > 0.0)) throw std::invalid_argument("--years must be positive");
  if (!(dt_seconds > 0.0)) throw std::invalid_argument("--dt must be positive seconds");
  const long long n = std::llround(years * sim::kTradingSecondsPerYear / dt_seconds);
  if (n < 1) throw std::invalid_argument("horizon shorter than one step");
  return static_cast<std::size_t>(n);
}

std::string join_path(const std::string& dir, const std::string& leaf) {
  return (fs::path(dir) / leaf).string();
}

void emit_digest(const std::string& out_dir, const std::string& name, const io::KvPairs& kv) {
  fs::create_directories(out_dir);
  io::write_config_digest(out_dir, name, kv);
}

std::string kv_lookup(const io::KvPairs& kv, const std::string& key, const std::string& where) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  throw std::invalid_argument(where + ": missing key '" + key + "'");
}

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  return out;
}

std::vector<std::int64_t> panel_timestamps(const backtest::MarketPanel& panel) {
  std::vector<std::int64_t> ts(panel.n_steps());
  for (std::size_t i = 0; i < ts.size(); ++i)
    ts[i] = panel.t0 + std::llround(panel.dt * static_cast<double>(i));
  return ts;
}

const char* class_name(martingale::MartingaleClass c) {
  return c == martingale::MartingaleClass::TrueMartingale ? "TM" : "SLM";
}

// Shared option bundles. Each subcommand owns one options struct allocated on
// the heap so the CLI11 callbacks can bind to stable addresses.

struct CommonOpts {
  std::string out = ".";
  std::uint64_t seed = 42;
  std::uint64_t stream = 0;
  std::int64_t threads = 1;
};

void add_out(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
}

void add_seed_stream(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--seed", o.seed, "RNG seed (default: BUBBLELAB_SEED or 42)")
      ->capture_default_str();
  sub->add_option("--stream", o.stream, "RNG stream id")->capture_default_str();
}

void add_threads(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--threads", o.threads, "Worker thread cap (0 = hardware)")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{4096}))
      ->capture_default_str();
}

void apply_threads(const CommonOpts& o) { set_max_threads(static_cast<unsigned>(o.threads)); }

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  CommonOpts common;
  double gamma0 = 0.15;
  double gamma1 = 0.9;
  double gamma0b = 0.0;
  double gamma1b = 0.0;
  double persistence = 0.9999;
  double years = 3.0;
  std::int64_t steps = 0;
  double dt = 120.0;
  double s0 = 1.0;
  bool two_state = false;
};

void run_simulate(const SimulateOpts& o) {
  apply_threads(o.common);
  const std::size_t n_steps = resolve_steps(o.steps, o.years, o.dt);
  const sim::PowerLawParams a(o.gamma0, o.gamma1);
  sim::RegimeChainSpec chain =
      o.two_state ? sim::RegimeChainSpec::two_state(a, {o.gamma0b, o.gamma1b}, o.persistence,
                                                    o.persistence)
                  : sim::RegimeChainSpec::single_state(a);
  chain.validate();
  if (!(o.s0 > 0.0)) throw std::invalid_argument("--s0 must be positive");

  io::KvPairs kv{{"gamma0", io::format_double(o.gamma0)},
                 {"gamma1", io::format_double(o.gamma1)},
                 {"n_states", o.two_state ? "2" : "1"},
                 {"n_steps", std::to_string(n_steps)},
                 {"dt_seconds", io::format_double(o.dt)},
                 {"s0", io::format_double(o.s0)},
                 {"seed", std::to_string(o.common.seed)},
                 {"stream", std::to_string(o.common.stream)}};
  if (o.two_state) {
    kv.emplace_back("gamma0b", io::format_double(o.gamma0b));
    kv.emplace_back("gamma1b", io::format_double(o.gamma1b));
    kv.emplace_back("persistence", io::format_double(o.persistence));
  }
  emit_digest(o.common.out, "simulate", kv);

  const auto path = sim::simulate_path(chain, o.s0, n_steps, sim::years_from_seconds(o.dt),
                                       RngSpec{o.common.seed, o.common.stream});
  const std::string file = join_path(o.common.out, "path.csv");
  io::write_price_path_csv(file, path);
  std::cout << "wrote " << file << " (" << path.size() << " rows)\n";
}

// ----------------------------------------------------------------- datagen

struct DatagenOpts {
  CommonOpts common;
  std::int64_t paths = 0;
  double years = 1.0;
  std::int64_t steps = 0;
  double dt = 120.0;
  double s0 = 1.0;
  std::string pool = "0.15:0.9,0.15:1.1";
  double p_lo = 0.995;
  double p_hi = 0.9999;
  std::int64_t redraw = 21 * static_cast<std::int64_t>(sim::kStepsPerTradingDay);
};

void run_datagen(const DatagenOpts& o) {
  apply_threads(o.common);
  datagen::DatasetSpec spec;
  spec.n_paths = static_cast<std::size_t>(o.paths);
  spec.n_steps = resolve_steps(o.steps, o.years, o.dt);
  spec.dt_seconds = o.dt;
  spec.s0 = o.s0;
  spec.state_pool = parse_pool(o.pool);
  spec.schedule.persistence_lo = o.p_lo;
  spec.schedule.persistence_hi = o.p_hi;
  spec.schedule.redraw_interval = static_cast<std::size_t>(o.redraw);
  spec.rng = RngSpec{o.common.seed, o.common.stream};
  spec.validate();

  emit_digest(o.common.out, "datagen",
              {{"n_paths", std::to_string(spec.n_paths)},
               {"n_steps", std::to_string(spec.n_steps)},
               {"dt_seconds", io::format_double(spec.dt_seconds)},
               {"s0", io::format_double(spec.s0)},
               {"pool", o.pool},
               {"persistence_lo", io::format_double(o.p_lo)},
               {"persistence_hi", io::format_double(o.p_hi)},
               {"redraw_interval", std::to_string(o.redraw)},
               {"seed", std::to_string(o.common.seed)},
               {"stream", std::to_string(o.common.stream)}});

  const auto corpus = datagen::generate_dataset(spec);
  io::write_corpus(o.common.out, corpus, spec);
  std::cout << "wrote corpus of " << corpus.size() << " paths to " << o.common.out << "\n";
}

// ------------------------------------------------------------------- train

struct TrainOpts {
  CommonOpts common;
  std::string corpus;
  std::int64_t hidden = 16;
  std::int64_t epochs = 10;
  std::int64_t chunk = 512;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip = 1.0;
};

void run_train(const TrainOpts& o) {
  apply_threads(o.common);
  const auto corpus = io::read_corpus(o.corpus);
  if (corpus.items.empty()) throw std::invalid_argument("training corpus is empty");

  std::vector<sim::PricePath> paths;
  paths.reserve(corpus.items.size());
  for (const auto& item : corpus.items) paths.push_back(item.path);
  const nnet::FeatureStats stats = nnet::compute_feature_stats(paths);

  std::vector<nnet::Sequence> data;
  data.reserve(corpus.items.size());
  for (const auto& item : corpus.items) {
    nnet::Sequence seq;
    seq.features = nnet::featurize(item.path, stats);
    // Feature column j describes the step into price j+1; it inherits that
    // step's regime label.
    seq.labels.assign(item.labels.begin() + 1, item.labels.end());
    data.push_back(std::move(seq));
  }

  nnet::TrainConfig cfg;
  cfg.hidden_dim = static_cast<std::size_t>(o.hidden);
  cfg.epochs = static_cast<std::size_t>(o.epochs);
  cfg.chunk_len = static_cast<std::size_t>(o.chunk);
  cfg.learning_rate = o.lr;
  cfg.beta1 = o.beta1;
  cfg.beta2 = o.beta2;
  cfg.adam_eps = o.adam_eps;
  cfg.grad_clip_norm = o.clip;
  cfg.rng = RngSpec{o.common.seed, o.common.stream};
  cfg.validate();

  emit_digest(o.common.out, "train",
              {{"corpus", o.corpus},
               {"hidden_dim", std::to_string(o.hidden)},
               {"epochs", std::to_string(o.epochs)},
               {"chunk_len", std::to_string(o.chunk)},
               {"learning_rate", io::format_double(o.lr)},
               {"beta1", io::format_double(o.beta1)},
               {"beta2", io::format_double(o.beta2)},
               {"adam_eps", io::format_double(o.adam_eps)},
               {"grad_clip_norm", io::format_double(o.clip)},
               {"seed", std::to_string(o.common.seed)},
               {"stream", std::to_string(o.common.stream)}});

  auto result = nnet::train(data, cfg);
  result.model.feature_stats = stats;

  const std::string ckpt = join_path(o.common.out, "model.ckpt");
  const std::string log = join_path(o.common.out, "training_log.csv");
  nnet::save_checkpoint(result.model, ckpt);
  io::write_training_log_csv(log, result.history);
  std::cout << "wrote " << ckpt << " and " << log << "\n";
  if (!result.history.empty())
    std::cout << "final epoch loss=" << result.history.back().loss
              << " accuracy=" << result.history.back().accuracy << "\n";
}

// ---------------------------------------------------------------- classify

struct ClassifyOpts {
  CommonOpts common;
  std::string model;
  std::string path_file;
  std::string tabulated;
  double epsilon = 1.0;
  double truncate_k = 0.0;
  std::int64_t truncate_window = static_cast<std::int64_t>(sim::kStepsPerTradingDay);
};

void run_classify(const ClassifyOpts& o) {
  apply_threads(o.common);
  if (!o.tabulated.empty()) {
    const auto xy = io::read_xy_csv(o.tabulated);
    const auto result = martingale::integral_tail_test(xy, o.epsilon);
    emit_digest(o.common.out, "classify",
                {{"tabulated", o.tabulated}, {"epsilon", io::format_double(o.epsilon)}});
    const std::string file = join_path(o.common.out, "tail_test.txt");
    io::write_kv_file(file, {{"class", class_name(result.cls)},
                             {"fitted_exponent", io::format_double(result.fitted_exponent)}});
    std::cout << "class=" << class_name(result.cls)
              << " fitted_exponent=" << io::format_double(result.fitted_exponent) << "\n";
    return;
  }

  if (o.model.empty() || o.path_file.empty())
    throw std::invalid_argument("classify needs --model and --path (or --tabulated)");
  const auto model = nnet::load_checkpoint(o.model);
  sim::PricePath path = io::read_price_path_csv(o.path_file);
  if (o.truncate_k > 0.0)
    path = backtest::jump_truncate(path, o.truncate_k,
                                   static_cast<std::size_t>(o.truncate_window));

  emit_digest(o.common.out, "classify",
              {{"model", o.model},
               {"path", o.path_file},
               {"truncate_k", io::format_double(o.truncate_k)},
               {"truncate_window", std::to_string(o.truncate_window)}});

  const auto result = nnet::classify_sequence(model, path);
  const std::string labels_file = join_path(o.common.out, "labels.csv");
  io::write_labels_csv(labels_file, path, result.labels);

  const std::string probs_file = join_path(o.common.out, "probs.csv");
  auto out = open_out(probs_file);
  out << "t,prob_slm,prob_tm\n";
  for (std::size_t i = 0; i < result.probs.size(); ++i)
    out << path.timestamp(i) << ',' << io::format_double(result.probs[i][0]) << ','
        << io::format_double(result.probs[i][1]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + probs_file);
  std::cout << "wrote " << labels_file << " and " << probs_file << "\n";
}

// ---------------------------------------------------------------- estimate

struct EstimateOpts {
  CommonOpts common;
  std::string path_file;
  std::int64_t window = 21 * static_cast<std::int64_t>(sim::kStepsPerTradingDay);
  std::int64_t stride = static_cast<std::int64_t>(sim::kStepsPerTradingDay);
  double grid_lo = 0.51;
  double grid_hi = 2.0;
  std::int64_t grid_points = 150;
};

estimator::RollingConfig rolling_config_from(std::int64_t window, std::int64_t stride,
                                             double grid_lo, double grid_hi,
                                             std::int64_t grid_points) {
  estimator::RollingConfig cfg;
  cfg.window_len = static_cast<std::size_t>(window);
  cfg.stride = static_cast<std::size_t>(stride);
  cfg.grid.lo = grid_lo;
  cfg.grid.hi = grid_hi;
  cfg.grid.points = static_cast<std::size_t>(grid_points);
  cfg.validate();
  return cfg;
}

void run_estimate(const EstimateOpts& o) {
  apply_threads(o.common);
  const auto cfg =
      rolling_config_from(o.window, o.stride, o.grid_lo, o.grid_hi, o.grid_points);
  const auto path = io::read_price_path_csv(o.path_file);

  emit_digest(o.common.out, "estimate",
              {{"path", o.path_file},
               {"window", std::to_string(o.window)},
               {"stride", std::to_string(o.stride)},
               {"grid_lo", io::format_double(o.grid_lo)},
               {"grid_hi", io::format_double(o.grid_hi)},
               {"grid_points", std::to_string(o.grid_points)}});

  const auto labels = estimator::rolling_classify(path, cfg);
  const std::string file = join_path(o.common.out, "raw_labels.csv");
  io::write_labels_csv(file, path, labels);
  std::cout << "wrote " << file << "\n";
}

// ------------------------------------------------------------------ smooth

struct SmoothOpts {
  CommonOpts common;
  std::string labels_file;
  std::string hmm_file;
};

void run_smooth(const SmoothOpts& o) {
  const auto [ts, raw] = io::read_labels_csv_full(o.labels_file);
  const estimator::HmmSpec hmm =
      o.hmm_file.empty() ? estimator::HmmSpec{} : io::read_hmm_spec(o.hmm_file);
  hmm.validate();

  emit_digest(o.common.out, "smooth",
              {{"labels", o.labels_file},
               {"hmm", o.hmm_file.empty() ? "(defaults)" : o.hmm_file}});

  const auto smoothed = estimator::hmm_smooth(raw, hmm);
  const std::string file = join_path(o.common.out, "smoothed.csv");
  io::write_labels_csv(file, ts, smoothed);
  std::cout << "wrote " << file << "\n";
}

// ----------------------------------------------------------------- compare

struct CompareOpts {
  CommonOpts common;
  std::string corpus;
  std::string model;
  std::string hmm_file;
  std::string train_manifest;
  std::int64_t window = 21 * static_cast<std::int64_t>(sim::kStepsPerTradingDay);
  std::int64_t stride = static_cast<std::int64_t>(sim::kStepsPerTradingDay);
  double grid_lo = 0.51;
  double grid_hi = 2.0;
  std::int64_t grid_points = 150;
};

void run_compare(const CompareOpts& o) {
  apply_threads(o.common);
  const auto corpus = io::read_corpus(o.corpus);
  const auto model = nnet::load_checkpoint(o.model);
  const auto est_cfg =
      rolling_config_from(o.window, o.stride, o.grid_lo, o.grid_hi, o.grid_points);
  const estimator::HmmSpec hmm =
      o.hmm_file.empty() ? estimator::HmmSpec{} : io::read_hmm_spec(o.hmm_file);
  hmm.validate();

  evalkit::StreamRange range;
  const evalkit::StreamRange* range_ptr = nullptr;
  if (!o.train_manifest.empty()) {
    const auto kv = io::read_kv_file(o.train_manifest);
    range.seed = std::stoull(kv_lookup(kv, "seed", o.train_manifest));
    range.stream_begin = std::stoull(kv_lookup(kv, "stream", o.train_manifest));
    // Each corpus path consumes two streams (chain and prices).
    range.stream_end =
        range.stream_begin + 2 * std::stoull(kv_lookup(kv, "n_paths", o.train_manifest));
    range_ptr = &range;
  }

  emit_digest(o.common.out, "compare",
              {{"corpus", o.corpus},
               {"model", o.model},
               {"hmm", o.hmm_file.empty() ? "(defaults)" : o.hmm_file},
               {"train_manifest", o.train_manifest.empty() ? "(none)" : o.train_manifest},
               {"window", std::to_string(o.window)},
               {"stride", std::to_string(o.stride)},
               {"grid_lo", io::format_double(o.grid_lo)},
               {"grid_hi", io::format_double(o.grid_hi)},
               {"grid_points", std::to_string(o.grid_points)}});

  const auto report =
      evalkit::compare_methods(corpus.items, corpus.spec, model, est_cfg, hmm, range_ptr);

  const std::string report_file = join_path(o.common.out, "report.txt");
  {
    auto out = open_out(report_file);
    out << "corpus_manifest_fnv1a="
        << io::hex64(io::fnv1a_file(join_path(o.corpus, "manifest"))) << "\n";
    out << "model_fnv1a=" << io::hex64(io::fnv1a_file(o.model)) << "\n";
    out << report.to_text(false);
    if (!out) throw std::runtime_error("write failed: " + report_file);
  }
  const std::string timings_file = join_path(o.common.out, "timings.txt");
  io::write_kv_file(timings_file,
                    {{"network.wall_seconds", io::format_double(report.network.wall_seconds)},
                     {"parametric_estimator.wall_seconds",
                      io::format_double(report.estimator.wall_seconds)}});
  std::cout << report.to_text(true);
  std::cout << "wrote " << report_file << " and " << timings_file << "\n";
}

// ---------------------------------------------------------------- backtest

struct BacktestOpts {
  CommonOpts common;
  std::string panel_file;
  std::string signals_dir;
  std::int64_t stride = static_cast<std::int64_t>(sim::kStepsPerTradingDay);
  double cap = 100.0;
  double fee = 0.0;
  bool synthetic = false;
  std::int64_t assets = 6;
  std::int64_t steps = 0;
  double years = 1.0;
  double dt = 120.0;
  double corr = 0.3;
  double drift = 0.0;
  double s0 = 1.0;
  double gamma0 = 0.15;
  double gamma1_tm = 0.9;
  double gamma1_slm = 1.3;
  double persistence = 0.999;
  std::string signals_mode = "truth";
};

void write_backtest_artifacts(const std::string& out_dir, const backtest::MarketPanel& panel,
                              const backtest::PortfolioLedger& ledger) {
  const std::string ledger_file = join_path(out_dir, "ledger.csv");
  io::write_ledger_csv(ledger_file, panel, ledger);

  const std::string events_file = join_path(out_dir, "backtest_events.csv");
  {
    auto out = open_out(events_file);
    out << "step,asset\n";
    for (const auto& e : ledger.events) out << e.step << ',' << e.asset << '\n';
    if (!out) throw std::runtime_error("write failed: " + events_file);
  }
  io::write_kv_file(join_path(out_dir, "backtest_summary.txt"),
                    {{"final_pnl", io::format_double(ledger.final_pnl)},
                     {"n_rebalances", std::to_string(ledger.rebalances.size())},
                     {"n_short_closes", std::to_string(ledger.events.size())},
                     {"n_steps", std::to_string(ledger.value.size())}});
  std::cout << "wrote " << ledger_file << "; final_pnl=" << io::format_double(ledger.final_pnl)
            << "\n";
}

void run_backtest_cmd(const BacktestOpts& o) {
  apply_threads(o.common);
  backtest::BacktestConfig cfg;
  cfg.rebalance_stride = static_cast<std::size_t>(o.stride);
  cfg.short_cap = o.cap;
  cfg.fee_rate = o.fee;
  cfg.validate();

  if (o.synthetic) {
    if (o.signals_mode != "truth" && o.signals_mode != "random")
      throw std::invalid_argument("--signals must be 'truth' or 'random'");
    backtest::MarketSpec spec;
    spec.n_assets = static_cast<std::size_t>(o.assets);
    spec.drift_per_year = o.drift;
    const sim::PowerLawParams tm(o.gamma0, o.gamma1_tm);
    spec.chain_pool = {sim::RegimeChainSpec::single_state(tm),
                       sim::RegimeChainSpec::two_state(tm, {o.gamma0, o.gamma1_slm},
                                                       o.persistence, o.persistence)};
    spec.correlation = o.corr;
    spec.n_steps = resolve_steps(o.steps, o.years, o.dt);
    spec.dt_years = sim::years_from_seconds(o.dt);
    spec.s0 = o.s0;
    spec.rng = RngSpec{o.common.seed, o.common.stream};
    spec.validate();

    emit_digest(o.common.out, "backtest",
                {{"mode", "synthetic"},
                 {"n_assets", std::to_string(o.assets)},
                 {"n_steps", std::to_string(spec.n_steps)},
                 {"dt_seconds", io::format_double(o.dt)},
                 {"correlation", io::format_double(o.corr)},
                 {"drift_per_year", io::format_double(o.drift)},
                 {"s0", io::format_double(o.s0)},
                 {"gamma0", io::format_double(o.gamma0)},
                 {"gamma1_tm", io::format_double(o.gamma1_tm)},
                 {"gamma1_slm", io::format_double(o.gamma1_slm)},
                 {"persistence", io::format_double(o.persistence)},
                 {"signals", o.signals_mode},
                 {"rebalance_stride", std::to_string(o.stride)},
                 {"short_cap", io::format_double(o.cap)},
                 {"fee_rate", io::format_double(o.fee)},
                 {"seed", std::to_string(o.common.seed)},
                 {"stream", std::to_string(o.common.stream)}});

    const auto market = backtest::simulate_market_p(spec);
    std::vector<martingale::LabelSeries> signals;
    if (o.signals_mode == "truth") {
      signals = market.asset_labels;
    } else {
      signals.resize(spec.n_assets);
      for (std::size_t i = 0; i < spec.n_assets; ++i) {
        // Offsets 0..n_assets are taken by the factor and the assets.
        Pcg64 gen(spec.rng.offset(1 + spec.n_assets + i));
        signals[i].resize(spec.n_steps + 1);
        for (auto& s : signals[i]) s = gen.uniform() < 0.5 ? 0 : 1;
      }
    }

    const std::string panel_file = join_path(o.common.out, "panel.csv");
    io::write_panel_csv(panel_file, market.panel);
    const std::string sig_dir = join_path(o.common.out, "signals");
    fs::create_directories(sig_dir);
    const auto ts = panel_timestamps(market.panel);
    for (std::size_t i = 0; i < spec.n_assets; ++i)
      io::write_labels_csv(join_path(sig_dir, market.panel.asset_names[i] + ".csv"), ts,
                           signals[i]);

    const auto ledger = backtest::run_backtest(market.panel, signals, cfg);
    write_backtest_artifacts(o.common.out, market.panel, ledger);
    return;
  }

  if (o.panel_file.empty() || o.signals_dir.empty())
    throw std::invalid_argument("backtest needs --panel and --signals-dir (or --synthetic)");
  const auto panel = io::read_panel_csv(o.panel_file);
  std::vector<martingale::LabelSeries> signals;
  signals.reserve(panel.asset_names.size());
  for (const auto& name : panel.asset_names)
    signals.push_back(io::read_labels_csv(join_path(o.signals_dir, name + ".csv")));

  emit_digest(o.common.out, "backtest",
              {{"mode", "files"},
               {"panel", o.panel_file},
               {"signals_dir", o.signals_dir},
               {"rebalance_stride", std::to_string(o.stride)},
               {"short_cap", io::format_double(o.cap)},
               {"fee_rate", io::format_double(o.fee)}});

  const auto ledger = backtest::run_backtest(panel, signals, cfg);
  write_backtest_artifacts(o.common.out, panel, ledger);
}

// ---------------------------------------------------------------- doubling

struct DoublingOpts {
  CommonOpts common;
  std::int64_t rounds = 4;
  std::int64_t paths = 100000;
};

void run_doubling(const DoublingOpts& o) {
  apply_threads(o.common);
  if (o.rounds < 1) throw std::invalid_argument("--rounds must be at least 1");
  if (o.paths < 1) throw std::invalid_argument("--paths must be at least 1");

  emit_digest(o.common.out, "doubling",
              {{"rounds", std::to_string(o.rounds)},
               {"paths", std::to_string(o.paths)},
               {"seed", std::to_string(o.common.seed)},
               {"stream", std::to_string(o.common.stream)}});

  const auto wealth =
      sim::simulate_doubling(static_cast<unsigned>(o.rounds),
                             static_cast<std::size_t>(o.paths),
                             RngSpec{o.common.seed, o.common.stream});
  std::map<std::int64_t, std::size_t> histogram;
  std::size_t wins = 0;
  double sum = 0.0;
  for (const auto w : wealth) {
    ++histogram[w];
    if (w == 1) ++wins;
    sum += static_cast<double>(w);
  }

  const std::string file = join_path(o.common.out, "doubling.csv");
  auto out = open_out(file);
  out << "wealth,count\n";
  for (const auto& [w, c] : histogram) out << w << ',' << c << '\n';
  if (!out) throw std::runtime_error("write failed: " + file);

  const double n = static_cast<double>(wealth.size());
  std::cout << "wrote " << file << "\n";
  std::cout << "win_fraction=" << io::format_double(static_cast<double>(wins) / n)
            << " mean_wealth=" << io::format_double(sum / n) << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    CLI::App app{"bubblelab: martingale-vs-bubble classification pipeline"};
    app.require_subcommand(1);
    // Options unmatched inside a subcommand fall through to the root, so
    // --config may follow the subcommand name.
    app.fallthrough();
    app.set_config("--config", "",
                   "key=value config file; keys are <subcommand>.<flag> (no dashes); "
                   "command-line flags override it");
    app.allow_config_extras(false);

    const std::uint64_t env_seed = default_seed();

    // simulate
    auto sim_opts = std::make_shared<SimulateOpts>();
    sim_opts->common.seed = env_seed;
    {
      auto* sub = app.add_subcommand("simulate", "Simulate one regime-switching price path");
      auto& o = *sim_opts;
      sub->add_option("--gamma0", o.gamma0, "Diffusion scale")->capture_default_str();
      sub->add_option("--gamma1", o.gamma1, "Diffusion exponent (>1 = bubble)")
          ->capture_default_str();
      auto* g0b = sub->add_option("--gamma0b", o.gamma0b, "Second-state scale");
      auto* g1b = sub->add_option("--gamma1b", o.gamma1b, "Second-state exponent");
      g0b->needs(g1b);
      g1b->needs(g0b);
      sub->add_option("--persistence", o.persistence,
                      "Per-state stay probability when two states are given")
          ->capture_default_str();
      sub->add_option("--years", o.years, "Horizon in trading years")->capture_default_str();
      sub->add_option("--steps", o.steps, "Step count (overrides --years)")
          ->capture_default_str();
      sub->add_option("--dt", o.dt, "Step size in seconds")->capture_default_str();
      sub->add_option("--s0", o.s0, "Initial price")->capture_default_str();
      add_seed_stream(sub, o.common);
      add_threads(sub, o.common);
      add_out(sub, o.common);
      sub->callback([sim_opts, g0b] {
        sim_opts->two_state = g0b->count() > 0;
        run_simulate(*sim_opts);
      });
    }

    // datagen
    auto gen_opts = std::make_shared<DatagenOpts>();
    gen_opts->common.seed = env_seed;
    {
      auto* sub = app.add_subcommand("datagen", "Generate a labeled training corpus");
      auto& o = *gen_opts;
      sub->add_option("--paths", o.paths, "Number of paths")->required();
      sub->add_option("--years", o.years, "Horizon per path in trading years")
          ->capture_default_str();
      sub->add_option("--steps", o.steps, "Steps per path (overrides --years)")
          ->capture_default_str();
      sub->add_option("--dt", o.dt, "Step size in seconds")->capture_default_str();
      sub->add_option("--s0", o.s0, "Initial price")->capture_default_str();
      sub->add_option("--pool", o.pool, "Regime pool as scale:exponent,...")
          ->capture_default_str();
      sub->add_option("--p-lo", o.p_lo, "Minimum regime persistence")->capture_default_str();
      sub->add_option("--p-hi", o.p_hi, "Maximum regime persistence")->capture_default_str();
      sub->add_option("--redraw", o.redraw, "Steps between transition-matrix redraws")
          ->capture_default_str();
      add_seed_stream(sub, o.common);
      add_threads(sub, o.common);
      add_out(sub, o.common);
      sub->callback([gen_opts] { run_datagen(*gen_opts); });
    }

    // train
    auto train_opts = std::make_shared<TrainOpts>();
    train_opts->common.seed = env_seed;
    {
      auto* sub = app.add_subcommand("train", "Train the bidirectional LSTM classifier");
      auto& o = *train_opts;
      sub->add_option("--corpus", o.corpus, "Corpus directory from datagen")->required();
      sub->add_option("--hidden", o.hidden, "Hidden units per direction")
          ->capture_default_str();
      sub->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
      sub->add_option("--chunk", o.chunk, "Chunk length in steps")->capture_default_str();
      sub->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
      sub->add_option("--beta1", o.beta1, "Adam beta1")->capture_default_str();
      sub->add_option("--beta2", o.beta2, "Adam beta2")->capture_default_str();
      sub->add_option("--adam-eps", o.adam_eps, "Adam epsilon")->capture_default_str();
      sub->add_option("--clip", o.clip, "Global gradient-norm clip")->capture_default_str();
      add_seed_stream(sub, o.common);
      add_threads(sub, o.common);
      add_out(sub, o.common);
      sub->callback([train_opts] { run_train(*train_opts); });
    }

    // classify
    auto cls_opts = std::make_shared<ClassifyOpts>();
    {
      auto* sub = app.add_subcommand(
          "classify", "Label a price path with a trained model, or run the integral tail test");
      auto& o = *cls_opts;
      sub->add_option("--model", o.model, "Model checkpoint");
      sub->add_option("--path", o.path_file, "Price path CSV");
      sub->add_option("--tabulated", o.tabulated,
                      "Tabulated diffusion CSV (x,b); runs the tail test instead");
      sub->add_option("--epsilon", o.epsilon, "Tail-test lower bound")->capture_default_str();
      sub->add_option("--truncate-k", o.truncate_k,
                      "Jump truncation threshold in MADs (0 = off)")
          ->capture_default_str();
      sub->add_option("--truncate-window", o.truncate_window, "Jump truncation window")
          ->capture_default_str();
      add_threads(sub, o.common);
      add_out(sub, o.common);
      sub->callback([cls_opts] { run_classify(*cls_opts); });
    }

    // estimate
    auto est_opts = std::make_shared<EstimateOpts>();
    {
      auto* sub =
          app.add_subcommand("estimate", "Rolling parametric-estimator labels for a path");
      auto& o = *est_opts;
      sub->add_option("--path", o.path_file, "Price path CSV")->required();
      sub->add_option("--window", o.window, "Window length in steps")->capture_default_str();
      sub->add_option("--stride", o.stride, "Window stride in steps")->capture_default_str();
      sub->add_option("--grid-lo", o.grid_lo, "Exponent grid lower edge")
          ->capture_default_str();
      sub->add_option("--grid-hi", o.grid_hi, "Exponent grid upper edge")
          ->capture_default_str();
      sub->add_option("--grid-points", o.grid_points, "Exponent grid size")
          ->capture_default_str();
      add_threads(sub, o.common);
      add_out(sub, o.common);
      sub->callback([est_opts] { run_estimate(*est_opts); });
    }

    // smooth
    auto smooth_opts = std::make_shared<SmoothOpts>();
    {
      auto* sub = app.add_subcommand("smooth", "HMM-smooth a raw label series");
      auto& o = *smooth_opts;
      sub->add_option("--labels", o.labels_file, "Raw labels CSV")->required();
      sub->add_option("--hmm", o.hmm_file, "HMM spec file (defaults used when absent)");
      add_out(sub, o.common);
      sub->callback([smooth_opts] { run_smooth(*smooth_opts); });
    }

    // compare
    auto cmp_opts = std::make_shared<CompareOpts>();
    {
      auto* sub = app.add_subcommand(
          "compare", "Score network vs parametric estimator on a labeled corpus");
      auto& o = *cmp_opts;
      sub->add_option("--corpus", o.corpus, "Held-out corpus directory")->required();
      sub->add_option("--model", o.model, "Model checkpoint")->required();
      sub->add_option("--hmm", o.hmm_file, "HMM spec file (defaults used when absent)");
      sub->add_option("--train-manifest", o.train_manifest,
                      "Training corpus manifest; rejects stream overlap with the corpus");
      sub->add_option("--window", o.window, "Estimator window length")->capture_default_str();
      sub->add_option("--stride", o.stride, "Estimator window stride")->capture_default_str();
      sub->add_option("--grid-lo", o.grid_lo, "Exponent grid lower edge")
          ->capture_default_str();
      sub->add_option("--grid-hi", o.grid_hi, "Exponent grid upper edge")
          ->capture_default_str();
      sub->add_option("--grid-points", o.grid_points, "Exponent grid size")
          ->capture_default_str();
      add_threads(sub, o.common);
      add_out(sub, o.common);
      sub->callback([cmp_opts] { run_compare(*cmp_opts); });
    }

    // backtest
    auto bt_opts = std::make_shared<BacktestOpts>();
    bt_opts->common.seed = env_seed;
    {
      auto* sub = app.add_subcommand(
          "backtest", "Run the zero-net-exposure long-short strategy on a market panel");
      auto& o = *bt_opts;
      sub->add_option("--panel", o.panel_file, "Market panel CSV");
      sub->add_option("--signals-dir", o.signals_dir,
                      "Directory with per-asset label CSVs named <asset>.csv");
      sub->add_option("--rebalance-stride", o.stride, "Steps between rebalances")
          ->capture_default_str();
      sub->add_option("--cap", o.cap, "Dollars shorted per bubble asset")
          ->capture_default_str();
      sub->add_option("--fee", o.fee, "Proportional cost per traded dollar")
          ->capture_default_str();
      auto* syn = sub->add_flag("--synthetic", o.synthetic,
                                "Simulate a synthetic market instead of reading files");
      sub->add_option("--assets", o.assets, "Synthetic: number of assets")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--steps", o.steps, "Synthetic: steps (overrides --years)")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--years", o.years, "Synthetic: horizon in trading years")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--dt", o.dt, "Synthetic: step size in seconds")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--corr", o.corr, "Synthetic: common-factor correlation")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--drift", o.drift, "Synthetic: drift per year")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--s0", o.s0, "Synthetic: initial price")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--gamma0", o.gamma0, "Synthetic: diffusion scale")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--gamma1-tm", o.gamma1_tm, "Synthetic: calm-regime exponent")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--gamma1-slm", o.gamma1_slm, "Synthetic: bubble-regime exponent")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--persistence", o.persistence, "Synthetic: bubble-chain persistence")
          ->capture_default_str()
          ->needs(syn);
      sub->add_option("--signals", o.signals_mode, "Synthetic: 'truth' or 'random' signals")
          ->capture_default_str()
          ->needs(syn);
      add_seed_stream(sub, o.common);
      add_threads(sub, o.common);
      add_out(sub, o.common);
      sub->callback([bt_opts] { run_backtest_cmd(*bt_opts); });
    }

    // doubling
    auto dbl_opts = std::make_shared<DoublingOpts>();
    dbl_opts->common.seed = env_seed;
    {
      auto* sub = app.add_subcommand(
          "doubling", "Doubling strategy on fair coin flips: terminal wealth histogram");
      auto& o = *dbl_opts;
      sub->add_option("--rounds", o.rounds, "Maximum doubling rounds")->capture_default_str();
      sub->add_option("--paths", o.paths, "Number of independent plays")
          ->capture_default_str();
      add_seed_stream(sub, o.common);
      add_threads(sub, o.common);
      add_out(sub, o.common);
      sub->callback([dbl_opts] { run_doubling(*dbl_opts); });
    }

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 1;
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace bubblelab::cli
