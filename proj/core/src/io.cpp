#include "bubblelab/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bubblelab::io {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  return out;
}

std::ifstream open_in(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open: " + file);
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_double(const std::string& s, const std::string& file, std::size_t line_no) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                ": bad numeric field '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& file, std::size_t line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                ": bad integer field '" + s + "'");
  return v;
}

void expect_header(std::ifstream& in, const std::string& expected, const std::string& file) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(file + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected)
    throw std::invalid_argument(file + ": expected header '" + expected + "', got '" +
                                line + "'");
}

// Timestamps are integer seconds; dt is recovered from the span. Paths
// written with integer dt round-trip exactly.
double infer_dt(std::int64_t t0, std::int64_t t_last, std::size_t n_rows) {
  if (n_rows < 2) return 1.0;
  return static_cast<double>(t_last - t0) / static_cast<double>(n_rows - 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_price_path_csv(const std::string& file, const sim::PricePath& path) {
  auto out = open_out(file);
  out << "t,price,regime\n";
  for (std::size_t i = 0; i < path.prices.size(); ++i) {
    out << path.timestamp(i) << ',' << format_double(path.prices[i]) << ',';
    if (path.regime_ids) out << (*path.regime_ids)[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + file);
}

sim::PricePath read_price_path_csv(const std::string& file) {
  auto in = open_in(file);
  expect_header(in, "t,price,regime", file);

  sim::PricePath path;
  std::vector<std::int64_t> ts;
  std::vector<int> regimes;
  bool any_regime = false;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3)
      throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                  ": expected 3 fields");
    ts.push_back(parse_int(fields[0], file, line_no));
    const double price = parse_double(fields[1], file, line_no);
    if (!std::isfinite(price) || price < 0.0)
      throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                  ": price must be finite and >= 0");
    path.prices.push_back(price);
    if (fields[2].empty()) {
      if (any_regime)
        throw std::invalid_argument(file + ": regime column must be all present or all empty");
      regimes.push_back(-1);
    } else {
      regimes.push_back(static_cast<int>(parse_int(fields[2], file, line_no)));
      any_regime = true;
    }
  }
  if (path.prices.size() < 2)
    throw std::invalid_argument(file + ": need at least 2 rows");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] <= ts[i - 1])
      throw std::invalid_argument(file + ": timestamps must strictly increase");
  if (any_regime) {
    for (int r : regimes)
      if (r < 0)
        throw std::invalid_argument(file + ": regime column must be all present or all empty");
    path.regime_ids = std::move(regimes);
  }
  path.t0 = ts.front();
  path.dt = infer_dt(ts.front(), ts.back(), ts.size());
  return path;
}

void write_labels_csv(const std::string& file, const sim::PricePath& path,
                      const martingale::LabelSeries& labels) {
  if (labels.size() != path.prices.size())
    throw std::invalid_argument("write_labels_csv: label/path length mismatch");
  auto out = open_out(file);
  out << "t,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << path.timestamp(i) << ',' << labels[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + file);
}

void write_labels_csv(const std::string& file, const std::vector<std::int64_t>& timestamps,
                      const martingale::LabelSeries& labels) {
  if (labels.size() != timestamps.size())
    throw std::invalid_argument("write_labels_csv: label/timestamp length mismatch");
  auto out = open_out(file);
  out << "t,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << timestamps[i] << ',' << labels[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + file);
}

martingale::LabelSeries read_labels_csv(const std::string& file) {
  return read_labels_csv_full(file).second;
}

std::pair<std::vector<std::int64_t>, martingale::LabelSeries> read_labels_csv_full(
    const std::string& file) {
  auto in = open_in(file);
  expect_header(in, "t,label", file);
  std::vector<std::int64_t> ts;
  martingale::LabelSeries labels;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2)
      throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                  ": expected 2 fields");
    const std::int64_t t = parse_int(fields[0], file, line_no);
    if (!ts.empty() && t <= ts.back())
      throw std::invalid_argument(file + ": timestamps must strictly increase");
    ts.push_back(t);
    const std::int64_t v = parse_int(fields[1], file, line_no);
    if (v != 0 && v != 1)
      throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                  ": label must be 0 or 1");
    labels.push_back(static_cast<int>(v));
  }
  if (labels.empty()) throw std::invalid_argument(file + ": no labels");
  return {std::move(ts), std::move(labels)};
}

void write_xy_csv(const std::string& file, const std::vector<std::pair<double, double>>& xy) {
  auto out = open_out(file);
  out << "x,b\n";
  for (const auto& [x, b] : xy)
    out << format_double(x) << ',' << format_double(b) << '\n';
  if (!out) throw std::runtime_error("write failed: " + file);
}

std::vector<std::pair<double, double>> read_xy_csv(const std::string& file) {
  auto in = open_in(file);
  expect_header(in, "x,b", file);
  std::vector<std::pair<double, double>> xy;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2)
      throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                  ": expected 2 fields");
    xy.emplace_back(parse_double(fields[0], file, line_no),
                    parse_double(fields[1], file, line_no));
  }
  return xy;
}

void write_panel_csv(const std::string& file, const backtest::MarketPanel& panel) {
  panel.validate();
  auto out = open_out(file);
  out << 't';
  for (const auto& name : panel.asset_names) out << ',' << name;
  out << ",INDEX\n";
  for (std::size_t i = 0; i < panel.n_steps(); ++i) {
    out << panel.t0 + std::llround(panel.dt * static_cast<double>(i));
    for (const auto& series : panel.asset_prices) out << ',' << format_double(series[i]);
    out << ',' << format_double(panel.index_prices[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + file);
}

backtest::MarketPanel read_panel_csv(const std::string& file) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(file + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 3 || header.front() != "t" || header.back() != "INDEX")
    throw std::invalid_argument(file + ": expected header 't,<assets...>,INDEX'");

  backtest::MarketPanel panel;
  panel.asset_names.assign(header.begin() + 1, header.end() - 1);
  panel.asset_prices.assign(panel.asset_names.size(), {});

  std::vector<std::int64_t> ts;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                  ": field count mismatch");
    ts.push_back(parse_int(fields[0], file, line_no));
    for (std::size_t a = 0; a < panel.asset_names.size(); ++a)
      panel.asset_prices[a].push_back(parse_double(fields[a + 1], file, line_no));
    panel.index_prices.push_back(parse_double(fields.back(), file, line_no));
  }
  if (ts.size() < 2) throw std::invalid_argument(file + ": need at least 2 rows");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] <= ts[i - 1])
      throw std::invalid_argument(file + ": timestamps must strictly increase");
  panel.t0 = ts.front();
  panel.dt = infer_dt(ts.front(), ts.back(), ts.size());
  panel.validate();
  return panel;
}

void write_ledger_csv(const std::string& file, const backtest::MarketPanel& panel,
                      const backtest::PortfolioLedger& ledger) {
  if (ledger.value.size() != panel.n_steps())
    throw std::invalid_argument("write_ledger_csv: ledger/panel length mismatch");
  auto out = open_out(file);
  out << "t,portfolio_value,gross_short,gross_long,n_bubble_assets\n";
  for (std::size_t i = 0; i < ledger.value.size(); ++i) {
    out << panel.t0 + std::llround(panel.dt * static_cast<double>(i)) << ','
        << format_double(ledger.value[i]) << ',' << format_double(ledger.gross_short[i])
        << ',' << format_double(ledger.gross_long[i]) << ',' << ledger.n_bubble_assets[i]
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + file);
}

void write_training_log_csv(const std::string& file,
                            const std::vector<nnet::EpochStats>& history) {
  auto out = open_out(file);
  out << "epoch,loss,accuracy\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    out << (i + 1) << ',' << format_double(history[i].loss) << ','
        << format_double(history[i].accuracy) << '\n';
  if (!out) throw std::runtime_error("write failed: " + file);
}

void write_kv_file(const std::string& file, const KvPairs& kv) {
  auto out = open_out(file);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw std::runtime_error("write failed: " + file);
}

KvPairs read_kv_file(const std::string& file) {
  auto in = open_in(file);
  KvPairs kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(file + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

namespace {

std::array<double, 4> parse_row_major_4(const std::string& v, const std::string& file) {
  const auto fields = split_csv(v);
  if (fields.size() != 4)
    throw std::invalid_argument(file + ": expected 4 comma-separated entries, got '" + v + "'");
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = parse_double(fields[i], file, 0);
  return out;
}

}  // namespace

void write_hmm_spec(const std::string& file, const estimator::HmmSpec& spec) {
  spec.validate();
  KvPairs kv;
  auto join = [](const double* v, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ',';
      s += format_double(v[i]);
    }
    return s;
  };
  kv.emplace_back("transition", join(spec.transition.data(), 4));
  kv.emplace_back("emission", join(spec.emission.data(), 4));
  kv.emplace_back("initial", join(spec.initial.data(), 2));
  write_kv_file(file, kv);
}

estimator::HmmSpec read_hmm_spec(const std::string& file) {
  estimator::HmmSpec spec;
  bool seen_t = false, seen_e = false, seen_i = false;
  for (const auto& [k, v] : read_kv_file(file)) {
    if (k == "transition") {
      spec.transition = parse_row_major_4(v, file);
      seen_t = true;
    } else if (k == "emission") {
      spec.emission = parse_row_major_4(v, file);
      seen_e = true;
    } else if (k == "initial") {
      const auto fields = split_csv(v);
      if (fields.size() != 2)
        throw std::invalid_argument(file + ": initial needs 2 entries");
      spec.initial = {parse_double(fields[0], file, 0), parse_double(fields[1], file, 0)};
      seen_i = true;
    } else {
      throw std::invalid_argument(file + ": unknown key '" + k + "'");
    }
  }
  if (!seen_t || !seen_e || !seen_i)
    throw std::invalid_argument(file + ": transition, emission and initial are required");
  spec.validate();
  return spec;
}

namespace {

std::string pool_to_string(const std::vector<sim::PowerLawParams>& pool) {
  std::string s;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i) s += ',';
    s += format_double(pool[i].scale) + ":" + format_double(pool[i].exponent);
  }
  return s;
}

std::vector<sim::PowerLawParams> pool_from_string(const std::string& s) {
  std::vector<sim::PowerLawParams> pool;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t pos = s.find(',', start);
    if (pos == std::string::npos) pos = s.size();
    const std::string item = s.substr(start, pos - start);
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("state pool entry must be scale:exponent, got '" + item + "'");
    pool.emplace_back(parse_double(item.substr(0, colon), "state_pool", 0),
                      parse_double(item.substr(colon + 1), "state_pool", 0));
    start = pos + 1;
  }
  return pool;
}

}  // namespace

void write_corpus(const std::string& dir, const std::vector<datagen::LabeledPath>& corpus,
                  const datagen::DatasetSpec& spec) {
  if (corpus.size() != spec.n_paths)
    throw std::invalid_argument("write_corpus: corpus size does not match spec");
  fs::create_directories(dir);
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    write_price_path_csv(dir + "/path_" + std::to_string(k) + ".csv", corpus[k].path);
    write_labels_csv(dir + "/labels_" + std::to_string(k) + ".csv", corpus[k].path,
                     corpus[k].labels);
  }
  KvPairs kv;
  kv.emplace_back("format_version", "1");
  kv.emplace_back("n_paths", std::to_string(spec.n_paths));
  kv.emplace_back("n_steps", std::to_string(spec.n_steps));
  kv.emplace_back("dt_seconds", format_double(spec.dt_seconds));
  kv.emplace_back("s0", format_double(spec.s0));
  kv.emplace_back("state_pool", pool_to_string(spec.state_pool));
  kv.emplace_back("persistence_lo", format_double(spec.schedule.persistence_lo));
  kv.emplace_back("persistence_hi", format_double(spec.schedule.persistence_hi));
  kv.emplace_back("redraw_interval", std::to_string(spec.schedule.redraw_interval));
  kv.emplace_back("seed", std::to_string(spec.rng.seed));
  kv.emplace_back("stream", std::to_string(spec.rng.stream));
  write_kv_file(dir + "/manifest", kv);
}

CorpusOnDisk read_corpus(const std::string& dir) {
  const std::string manifest = dir + "/manifest";
  CorpusOnDisk corpus;
  datagen::DatasetSpec& spec = corpus.spec;
  bool seen_version = false;
  for (const auto& [k, v] : read_kv_file(manifest)) {
    if (k == "format_version") {
      if (v != "1")
        throw std::invalid_argument(manifest + ": unsupported format_version " + v);
      seen_version = true;
    } else if (k == "n_paths") {
      spec.n_paths = static_cast<std::size_t>(parse_int(v, manifest, 0));
    } else if (k == "n_steps") {
      spec.n_steps = static_cast<std::size_t>(parse_int(v, manifest, 0));
    } else if (k == "dt_seconds") {
      spec.dt_seconds = parse_double(v, manifest, 0);
    } else if (k == "s0") {
      spec.s0 = parse_double(v, manifest, 0);
    } else if (k == "state_pool") {
      spec.state_pool = pool_from_string(v);
    } else if (k == "persistence_lo") {
      spec.schedule.persistence_lo = parse_double(v, manifest, 0);
    } else if (k == "persistence_hi") {
      spec.schedule.persistence_hi = parse_double(v, manifest, 0);
    } else if (k == "redraw_interval") {
      spec.schedule.redraw_interval = static_cast<std::size_t>(parse_int(v, manifest, 0));
    } else if (k == "seed") {
      spec.rng.seed = static_cast<std::uint64_t>(parse_int(v, manifest, 0));
    } else if (k == "stream") {
      spec.rng.stream = static_cast<std::uint64_t>(parse_int(v, manifest, 0));
    } else {
      throw std::invalid_argument(manifest + ": unknown key '" + k + "'");
    }
  }
  if (!seen_version) throw std::invalid_argument(manifest + ": missing format_version");
  spec.validate();

  corpus.items.resize(spec.n_paths);
  for (std::size_t k = 0; k < spec.n_paths; ++k) {
    corpus.items[k].path = read_price_path_csv(dir + "/path_" + std::to_string(k) + ".csv");
    corpus.items[k].labels = read_labels_csv(dir + "/labels_" + std::to_string(k) + ".csv");
    if (corpus.items[k].labels.size() != corpus.items[k].path.prices.size())
      throw std::invalid_argument("read_corpus: path/label length mismatch at index " +
                                  std::to_string(k));
  }
  return corpus;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& file) {
  auto in = open_in(file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a(ss.str());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_config_digest(const std::string& dir, const std::string& name,
                         const KvPairs& kv) {
  std::string canonical;
  for (const auto& [k, v] : kv) canonical += k + "=" + v + "\n";
  KvPairs out = kv;
  out.emplace_back("config_digest", hex64(fnv1a(canonical)));
  fs::create_directories(dir);
  write_kv_file(dir + "/" + name + "_config.txt", out);
}

}  // namespace bubblelab::io
