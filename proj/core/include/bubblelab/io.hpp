#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bubblelab/backtest.hpp"
#include "bubblelab/datagen.hpp"
#include "bubblelab/estimator.hpp"
#include "bubblelab/martingale.hpp"
#include "bubblelab/nnet.hpp"
#include "bubblelab/sim.hpp"

namespace bubblelab::io {

// All CSV files carry integer epoch-second timestamps and full-precision
// (%.17g) numeric fields, so values survive a write/read cycle exactly.

// Price path CSV, header "t,price,regime". The regime column is empty when
// the path carries no regime ids.
void write_price_path_csv(const std::string& file, const sim::PricePath& path);
sim::PricePath read_price_path_csv(const std::string& file);

// Label series CSV, header "t,label".
void write_labels_csv(const std::string& file, const sim::PricePath& path,
                      const martingale::LabelSeries& labels);
void write_labels_csv(const std::string& file, const std::vector<std::int64_t>& timestamps,
                      const martingale::LabelSeries& labels);
martingale::LabelSeries read_labels_csv(const std::string& file);
std::pair<std::vector<std::int64_t>, martingale::LabelSeries> read_labels_csv_full(
    const std::string& file);

// Tabulated function CSV, header "x,b".
void write_xy_csv(const std::string& file, const std::vector<std::pair<double, double>>& xy);
std::vector<std::pair<double, double>> read_xy_csv(const std::string& file);

// Panel CSV, header "t,<asset...>,INDEX".
void write_panel_csv(const std::string& file, const backtest::MarketPanel& panel);
backtest::MarketPanel read_panel_csv(const std::string& file);

// Ledger CSV, header "t,portfolio_value,gross_short,gross_long,n_bubble_assets".
void write_ledger_csv(const std::string& file, const backtest::MarketPanel& panel,
                      const backtest::PortfolioLedger& ledger);

// Training log CSV, header "epoch,loss,accuracy".
void write_training_log_csv(const std::string& file,
                            const std::vector<nnet::EpochStats>& history);

// Flat key=value text; '#' starts a comment line. Order preserved on write.
using KvPairs = std::vector<std::pair<std::string, std::string>>;
void write_kv_file(const std::string& file, const KvPairs& kv);
KvPairs read_kv_file(const std::string& file);

// HMM spec as key=value with row-major comma-separated matrices
// (transition, emission, initial). Unknown keys are rejected.
void write_hmm_spec(const std::string& file, const estimator::HmmSpec& spec);
estimator::HmmSpec read_hmm_spec(const std::string& file);

// Corpus directory: path_<k>.csv, labels_<k>.csv and a "manifest" key=value
// file recording the full DatasetSpec.
void write_corpus(const std::string& dir, const std::vector<datagen::LabeledPath>& corpus,
                  const datagen::DatasetSpec& spec);
struct CorpusOnDisk {
  std::vector<datagen::LabeledPath> items;
  datagen::DatasetSpec spec;
};
CorpusOnDisk read_corpus(const std::string& dir);

// FNV-1a 64-bit digests used to stamp runs and reports.
std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t fnv1a_file(const std::string& file);
std::string hex64(std::uint64_t v);

// Writes <dir>/<name>_config.txt holding the resolved key=value config plus a
// digest line over the canonical text.
void write_config_digest(const std::string& dir, const std::string& name,
                         const KvPairs& kv);

std::string format_double(double v);

}  // namespace bubblelab::io
