#include "bubblelab/evalkit.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace bubblelab::evalkit {

double ConfusionReport::detection_pct() const {
  const std::size_t n = n_points();
  if (n == 0) throw std::invalid_argument("ConfusionReport: no points");
  return 100.0 * static_cast<double>(tm_as_tm + slm_as_slm) / static_cast<double>(n);
}

ConfusionReport& ConfusionReport::operator+=(const ConfusionReport& other) {
  tm_as_tm += other.tm_as_tm;
  tm_as_slm += other.tm_as_slm;
  slm_as_slm += other.slm_as_slm;
  slm_as_tm += other.slm_as_tm;
  return *this;
}

ConfusionReport score(const martingale::LabelSeries& predicted,
                      const martingale::LabelSeries& truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("score: length mismatch");
  if (predicted.empty()) throw std::invalid_argument("score: empty series");
  ConfusionReport report;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int p = predicted[i];
    const int t = truth[i];
    if ((p != 0 && p != 1) || (t != 0 && t != 1))
      throw std::invalid_argument("score: labels must be 0 or 1");
    if (t == 1)
      (p == 1 ? report.tm_as_tm : report.tm_as_slm) += 1;
    else
      (p == 0 ? report.slm_as_slm : report.slm_as_tm) += 1;
  }
  return report;
}

namespace {

MethodResult run_method(const std::vector<datagen::LabeledPath>& corpus,
                        const std::string& name, const Classifier& method) {
  MethodResult result;
  result.name = name;
  const auto start = std::chrono::steady_clock::now();
  std::vector<martingale::LabelSeries> predictions;
  predictions.reserve(corpus.size());
  for (const auto& item : corpus) predictions.push_back(method(item.path));
  const auto stop = std::chrono::steady_clock::now();
  result.wall_seconds = std::chrono::duration<double>(stop - start).count();

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto report = score(predictions[i], corpus[i].labels);
    result.per_path.push_back(report);
    result.total += report;
  }
  return result;
}

}  // namespace

ComparisonReport run_comparison(const std::vector<datagen::LabeledPath>& corpus,
                                const std::string& name_a, const Classifier& method_a,
                                const std::string& name_b, const Classifier& method_b) {
  if (corpus.empty()) throw std::invalid_argument("run_comparison: empty corpus");
  ComparisonReport report;
  report.n_paths = corpus.size();
  report.network = run_method(corpus, name_a, method_a);
  report.estimator = run_method(corpus, name_b, method_b);
  return report;
}

ComparisonReport compare_methods(const std::vector<datagen::LabeledPath>& corpus,
                                 const datagen::DatasetSpec& corpus_spec,
                                 const nnet::LstmModel& model,
                                 const estimator::RollingConfig& est_cfg,
                                 const estimator::HmmSpec& hmm,
                                 const StreamRange* training_range) {
  if (training_range) {
    // generate_dataset consumes streams [stream, stream + 2 n_paths).
    const std::uint64_t eval_begin = corpus_spec.rng.stream;
    const std::uint64_t eval_end = eval_begin + 2 * corpus_spec.n_paths;
    const bool same_seed = corpus_spec.rng.seed == training_range->seed;
    const bool overlap =
        eval_begin < training_range->stream_end && training_range->stream_begin < eval_end;
    if (same_seed && overlap)
      throw std::invalid_argument(
          "compare_methods: evaluation corpus overlaps the training streams");
  }

  const Classifier net = [&](const sim::PricePath& path) {
    return nnet::classify_sequence(model, path).labels;
  };
  const Classifier pe = [&](const sim::PricePath& path) {
    return estimator::hmm_smooth(estimator::rolling_classify(path, est_cfg), hmm);
  };
  return run_comparison(corpus, "network", net, "parametric_estimator", pe);
}

std::string ComparisonReport::to_text(bool include_timings) const {
  std::ostringstream out;
  out.precision(6);
  out << "n_paths=" << n_paths << "\n";
  out << "n_points=" << network.total.n_points() << "\n";
  for (const MethodResult* m : {&network, &estimator}) {
    out << m->name << ".detection_pct=" << m->total.detection_pct() << "\n";
    out << m->name << ".spurious_pct=" << m->total.spurious_pct() << "\n";
    out << m->name << ".counts=" << m->total.tm_as_tm << "," << m->total.tm_as_slm << ","
        << m->total.slm_as_slm << "," << m->total.slm_as_tm << "\n";
    if (include_timings) out << m->name << ".wall_seconds=" << m->wall_seconds << "\n";
  }
  for (std::size_t i = 0; i < network.per_path.size(); ++i) {
    out << "path_" << i << ".network_detection_pct=" << network.per_path[i].detection_pct()
        << "\n";
    out << "path_" << i
        << ".estimator_detection_pct=" << estimator.per_path[i].detection_pct() << "\n";
  }
  return out.str();
}

}  // namespace bubblelab::evalkit
