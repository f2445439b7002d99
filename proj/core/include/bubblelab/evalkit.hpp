#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bubblelab/datagen.hpp"
#include "bubblelab/estimator.hpp"
#include "bubblelab/martingale.hpp"
#include "bubblelab/nnet.hpp"

namespace bubblelab::evalkit {

// Counts over labeled steps; label 1 = true martingale, 0 = bubble.
struct ConfusionReport {
  std::size_t tm_as_tm = 0;
  std::size_t tm_as_slm = 0;
  std::size_t slm_as_slm = 0;
  std::size_t slm_as_tm = 0;

  std::size_t n_points() const { return tm_as_tm + tm_as_slm + slm_as_slm + slm_as_tm; }
  // Share of steps classified correctly, in percent.
  double detection_pct() const;
  // Complement: detection + spurious = 100.
  double spurious_pct() const { return 100.0 - detection_pct(); }

  ConfusionReport& operator+=(const ConfusionReport& other);
};

// Per-step comparison of equal-length 0/1 series.
ConfusionReport score(const martingale::LabelSeries& predicted,
                      const martingale::LabelSeries& truth);

struct MethodResult {
  std::string name;
  ConfusionReport total;                    // point-weighted across paths
  std::vector<ConfusionReport> per_path;
  double wall_seconds = 0.0;
};

struct ComparisonReport {
  MethodResult network;
  MethodResult estimator;
  std::size_t n_paths = 0;

  // include_timings=false yields run-invariant text for artifact diffing.
  std::string to_text(bool include_timings = true) const;
};

using Classifier = std::function<martingale::LabelSeries(const sim::PricePath&)>;

// Generic harness: runs both classifiers over the corpus, scores them against
// the corpus labels and times each method's total classification wall clock.
ComparisonReport run_comparison(const std::vector<datagen::LabeledPath>& corpus,
                                const std::string& name_a, const Classifier& method_a,
                                const std::string& name_b, const Classifier& method_b);

// Network vs parametric-estimator baseline (rolling fit + HMM smoothing) on a
// held-out corpus. When a training stream range is supplied, the corpus rng
// metadata must not overlap it; overlap is a validation error.
struct StreamRange {
  std::uint64_t seed = 0;
  std::uint64_t stream_begin = 0;
  std::uint64_t stream_end = 0;  // half-open
};

ComparisonReport compare_methods(const std::vector<datagen::LabeledPath>& corpus,
                                 const datagen::DatasetSpec& corpus_spec,
                                 const nnet::LstmModel& model,
                                 const estimator::RollingConfig& est_cfg,
                                 const estimator::HmmSpec& hmm,
                                 const StreamRange* training_range = nullptr);

}  // namespace bubblelab::evalkit
