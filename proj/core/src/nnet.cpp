#include "bubblelab/nnet.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bubblelab::nnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr double kProbFloor = 1e-12;

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) { return 1.0 / (1.0 + (-x).exp()); }

struct LayerCache {
  Matrix gates;   // 4H x T, post-activation [remember; save; focus; candidate]
  Matrix c;       // H x T
  Matrix tanh_c;  // H x T
  Matrix h;       // H x T
};

// Runs one LSTM direction over the whole sequence. Outputs (and caches) are
// indexed by time regardless of processing direction.
Matrix run_lstm(const LstmLayerParams& p, const Matrix& inputs, bool reversed,
                std::size_t hidden, LayerCache* cache) {
  const Eigen::Index h_dim = static_cast<Eigen::Index>(hidden);
  const Eigen::Index t_len = inputs.cols();
  Matrix h_out(h_dim, t_len);
  if (cache) {
    cache->gates.resize(4 * h_dim, t_len);
    cache->c.resize(h_dim, t_len);
    cache->tanh_c.resize(h_dim, t_len);
    cache->h.resize(h_dim, t_len);
  }

  Vector h_prev = Vector::Zero(h_dim);
  Vector c_prev = Vector::Zero(h_dim);
  Vector pre(4 * h_dim), gates(4 * h_dim), c(h_dim), tanh_c(h_dim), h(h_dim);

  for (Eigen::Index j = 0; j < t_len; ++j) {
    const Eigen::Index t = reversed ? t_len - 1 - j : j;
    pre.noalias() = p.w_in * inputs.col(t);
    pre.noalias() += p.w_rec * h_prev;
    pre += p.bias;

    gates.segment(0, 3 * h_dim) = sigmoid(pre.segment(0, 3 * h_dim).array());
    gates.segment(3 * h_dim, h_dim) = pre.segment(3 * h_dim, h_dim).array().tanh();

    const auto remember = gates.segment(kRemember * h_dim, h_dim).array();
    const auto save = gates.segment(kSave * h_dim, h_dim).array();
    const auto focus = gates.segment(kFocus * h_dim, h_dim).array();
    const auto candidate = gates.segment(kCandidate * h_dim, h_dim).array();

    c = (c_prev.array() * remember + save * candidate).matrix();
    tanh_c = c.array().tanh().matrix();
    h = (focus * tanh_c.array()).matrix();

    h_out.col(t) = h;
    if (cache) {
      cache->gates.col(t) = gates;
      cache->c.col(t) = c;
      cache->tanh_c.col(t) = tanh_c;
      cache->h.col(t) = h;
    }
    h_prev = h;
    c_prev = c;
  }
  return h_out;
}

// Backpropagation through one direction. dh_top is dLoss/dh indexed by time;
// gradients accumulate into grad, and dLoss/dinputs into dx_accum when given.
void backward_lstm(const LstmLayerParams& p, const LayerCache& cache,
                   const Matrix& inputs, const Matrix& dh_top, bool reversed,
                   std::size_t hidden, LstmLayerParams& grad, Matrix* dx_accum) {
  const Eigen::Index h_dim = static_cast<Eigen::Index>(hidden);
  const Eigen::Index t_len = inputs.cols();

  Vector dh_carry = Vector::Zero(h_dim);
  Vector dc_carry = Vector::Zero(h_dim);
  Vector dh(h_dim), dc(h_dim), d_pre(4 * h_dim);
  const Vector zero = Vector::Zero(h_dim);

  for (Eigen::Index j = t_len - 1; j >= 0; --j) {
    const Eigen::Index t = reversed ? t_len - 1 - j : j;
    const bool has_prev = j > 0;
    const Eigen::Index t_prev = reversed ? t + 1 : t - 1;

    const auto remember = cache.gates.col(t).segment(kRemember * h_dim, h_dim).array();
    const auto save = cache.gates.col(t).segment(kSave * h_dim, h_dim).array();
    const auto focus = cache.gates.col(t).segment(kFocus * h_dim, h_dim).array();
    const auto candidate = cache.gates.col(t).segment(kCandidate * h_dim, h_dim).array();
    const auto tanh_c = cache.tanh_c.col(t).array();

    dh = dh_top.col(t) + dh_carry;
    // h = focus * tanh(c); c = c_prev * remember + save * candidate
    dc = dc_carry.array() + dh.array() * focus * (1.0 - tanh_c.square());
    // Ternary between a column block and a vector materializes a temporary,
    // so both must land in named storage before .array() touches them.
    const Vector c_prev = has_prev ? Vector(cache.c.col(t_prev)) : zero;
    const Vector h_prev = has_prev ? Vector(cache.h.col(t_prev)) : zero;

    d_pre.segment(kRemember * h_dim, h_dim) =
        dc.array() * c_prev.array() * remember * (1.0 - remember);
    d_pre.segment(kSave * h_dim, h_dim) = dc.array() * candidate * save * (1.0 - save);
    d_pre.segment(kFocus * h_dim, h_dim) =
        dh.array() * tanh_c * focus * (1.0 - focus);
    d_pre.segment(kCandidate * h_dim, h_dim) =
        dc.array() * save * (1.0 - candidate.square());

    grad.w_in.noalias() += d_pre * inputs.col(t).transpose();
    if (has_prev) grad.w_rec.noalias() += d_pre * h_prev.transpose();
    grad.bias += d_pre;

    if (dx_accum) dx_accum->col(t).noalias() += p.w_in.transpose() * d_pre;
    dh_carry.noalias() = p.w_rec.transpose() * d_pre;
    dc_carry = (dc.array() * remember).matrix();
  }
}

struct ForwardCaches {
  LayerCache l1f, l1b, l2f, l2b;
  Matrix z1;  // 2H x T, [layer1_fwd; layer1_bwd]
  Matrix z2;  // 2H x T
};

Matrix forward_impl(const LstmModel& m, const Matrix& features, ForwardCaches* caches) {
  if (static_cast<std::size_t>(features.rows()) != m.input_dim)
    throw std::invalid_argument("network_forward: feature dimension mismatch");
  if (features.cols() < 1)
    throw std::invalid_argument("network_forward: empty feature sequence");
  if (!features.allFinite())
    throw std::invalid_argument("network_forward: non-finite features");

  const Eigen::Index h_dim = static_cast<Eigen::Index>(m.hidden_dim);
  const Eigen::Index t_len = features.cols();

  Matrix z1(2 * h_dim, t_len);
  z1.topRows(h_dim) =
      run_lstm(m.layer1_fwd, features, false, m.hidden_dim, caches ? &caches->l1f : nullptr);
  z1.bottomRows(h_dim) =
      run_lstm(m.layer1_bwd, features, true, m.hidden_dim, caches ? &caches->l1b : nullptr);

  Matrix z2(2 * h_dim, t_len);
  z2.topRows(h_dim) =
      run_lstm(m.layer2_fwd, z1, false, m.hidden_dim, caches ? &caches->l2f : nullptr);
  z2.bottomRows(h_dim) =
      run_lstm(m.layer2_bwd, z1, true, m.hidden_dim, caches ? &caches->l2b : nullptr);

  Matrix probs(2, t_len);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    Eigen::Vector2d logits = m.fc_w * z2.col(t) + m.fc_b;
    const double mx = logits.maxCoeff();
    const double e0 = std::exp(logits(0) - mx);
    const double e1 = std::exp(logits(1) - mx);
    probs(0, t) = e0 / (e0 + e1);
    probs(1, t) = e1 / (e0 + e1);
  }
  if (caches) {
    caches->z1 = std::move(z1);
    caches->z2 = std::move(z2);
  }
  return probs;
}

void check_labels(const std::vector<int>& labels, Eigen::Index t_len, const char* who) {
  if (static_cast<Eigen::Index>(labels.size()) != t_len)
    throw std::invalid_argument(std::string(who) + ": label/feature length mismatch");
  for (int v : labels)
    if (v != 0 && v != 1)
      throw std::invalid_argument(std::string(who) + ": labels must be 0 or 1");
}

BackwardResult backward_impl(const LstmModel& m, const Matrix& features,
                             const std::vector<int>& labels, Matrix* probs_out) {
  ForwardCaches caches;
  const Matrix probs = forward_impl(m, features, &caches);
  const Eigen::Index t_len = probs.cols();
  check_labels(labels, t_len, "network_backward");

  BackwardResult result;
  result.loss = mean_cross_entropy(probs, labels);
  result.grads = zeros_like(m);

  const Eigen::Index h_dim = static_cast<Eigen::Index>(m.hidden_dim);
  const double inv_t = 1.0 / static_cast<double>(t_len);

  // d(mean CE)/d(logits) = (p - onehot)/T. Steps where the floor clamps the
  // loss have exactly zero gradient.
  Matrix dlogits(2, t_len);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const int y = labels[static_cast<std::size_t>(t)];
    if (probs(y, t) < kProbFloor) {
      dlogits.col(t).setZero();
      continue;
    }
    dlogits(0, t) = (probs(0, t) - (y == 0 ? 1.0 : 0.0)) * inv_t;
    dlogits(1, t) = (probs(1, t) - (y == 1 ? 1.0 : 0.0)) * inv_t;
  }

  result.grads.fc_w.noalias() = dlogits * caches.z2.transpose();
  result.grads.fc_b = dlogits.rowwise().sum();

  Matrix dz2 = m.fc_w.transpose() * dlogits;  // 2H x T
  Matrix dz1 = Matrix::Zero(2 * h_dim, t_len);
  backward_lstm(m.layer2_fwd, caches.l2f, caches.z1, dz2.topRows(h_dim), false,
                m.hidden_dim, result.grads.layer2_fwd, &dz1);
  backward_lstm(m.layer2_bwd, caches.l2b, caches.z1, dz2.bottomRows(h_dim), true,
                m.hidden_dim, result.grads.layer2_bwd, &dz1);
  backward_lstm(m.layer1_fwd, caches.l1f, features, dz1.topRows(h_dim), false,
                m.hidden_dim, result.grads.layer1_fwd, nullptr);
  backward_lstm(m.layer1_bwd, caches.l1b, features, dz1.bottomRows(h_dim), true,
                m.hidden_dim, result.grads.layer1_bwd, nullptr);

  if (probs_out) *probs_out = probs;
  return result;
}

LstmLayerParams zero_layer(std::size_t in_dim, std::size_t hidden) {
  LstmLayerParams p;
  p.w_in = Matrix::Zero(4 * hidden, in_dim);
  p.w_rec = Matrix::Zero(4 * hidden, hidden);
  p.bias = Vector::Zero(4 * hidden);
  return p;
}

}  // namespace

std::vector<TensorView> tensor_views(LstmModel& m) {
  std::vector<TensorView> views;
  views.reserve(14);
  for (LstmLayerParams* layer : {&m.layer1_fwd, &m.layer1_bwd, &m.layer2_fwd, &m.layer2_bwd}) {
    views.push_back({layer->w_in.data(), static_cast<std::size_t>(layer->w_in.size())});
    views.push_back({layer->w_rec.data(), static_cast<std::size_t>(layer->w_rec.size())});
    views.push_back({layer->bias.data(), static_cast<std::size_t>(layer->bias.size())});
  }
  views.push_back({m.fc_w.data(), static_cast<std::size_t>(m.fc_w.size())});
  views.push_back({m.fc_b.data(), static_cast<std::size_t>(m.fc_b.size())});
  return views;
}

std::vector<ConstTensorView> tensor_views(const LstmModel& m) {
  auto views = tensor_views(const_cast<LstmModel&>(m));
  std::vector<ConstTensorView> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back({v.data, v.size});
  return out;
}

LstmModel zeros_like(const LstmModel& m) {
  LstmModel z;
  z.input_dim = m.input_dim;
  z.hidden_dim = m.hidden_dim;
  z.layer1_fwd = zero_layer(m.input_dim, m.hidden_dim);
  z.layer1_bwd = zero_layer(m.input_dim, m.hidden_dim);
  z.layer2_fwd = zero_layer(2 * m.hidden_dim, m.hidden_dim);
  z.layer2_bwd = zero_layer(2 * m.hidden_dim, m.hidden_dim);
  z.fc_w = Matrix::Zero(2, 2 * m.hidden_dim);
  z.fc_b = Vector::Zero(2);
  return z;
}

LstmModel init_model(std::size_t input_dim, std::size_t hidden_dim, Pcg64& gen) {
  if (input_dim == 0 || hidden_dim == 0)
    throw std::invalid_argument("init_model: dimensions must be positive");
  LstmModel m;
  m.input_dim = input_dim;
  m.hidden_dim = hidden_dim;
  m = zeros_like(m);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (const auto& view : tensor_views(m))
    for (std::size_t i = 0; i < view.size; ++i) view.data[i] = gen.uniform(-k, k);
  for (LstmLayerParams* layer : {&m.layer1_fwd, &m.layer1_bwd, &m.layer2_fwd, &m.layer2_bwd})
    layer->gate_bias(kRemember, hidden_dim).setOnes();
  return m;
}

Matrix network_forward(const LstmModel& model, const Matrix& features) {
  return forward_impl(model, features, nullptr);
}

double mean_cross_entropy(const Matrix& probs, const std::vector<int>& labels) {
  if (probs.rows() != 2) throw std::invalid_argument("mean_cross_entropy: need 2 rows");
  check_labels(labels, probs.cols(), "mean_cross_entropy");
  double total = 0.0;
  for (Eigen::Index t = 0; t < probs.cols(); ++t) {
    const double p = probs(labels[static_cast<std::size_t>(t)], t);
    total -= std::log(std::max(p, kProbFloor));
  }
  return total / static_cast<double>(probs.cols());
}

BackwardResult network_backward(const LstmModel& model, const Matrix& features,
                                const std::vector<int>& labels) {
  return backward_impl(model, features, labels, nullptr);
}

void TrainConfig::validate() const {
  if (hidden_dim == 0) throw std::invalid_argument("TrainConfig: hidden_dim must be >= 1");
  if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (chunk_len < 2) throw std::invalid_argument("TrainConfig: chunk_len must be >= 2");
  if (!(learning_rate > 0.0) && learning_rate != 0.0)
    throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("TrainConfig: betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("TrainConfig: adam_eps must be > 0");
  if (!(grad_clip_norm > 0.0))
    throw std::invalid_argument("TrainConfig: grad_clip_norm must be > 0");
}

TrainResult train(const std::vector<Sequence>& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  const std::size_t input_dim = static_cast<std::size_t>(data[0].features.rows());
  for (const auto& seq : data) {
    if (static_cast<std::size_t>(seq.features.rows()) != input_dim)
      throw std::invalid_argument("train: inconsistent feature dimensions");
    check_labels(seq.labels, seq.features.cols(), "train");
  }

  struct Chunk {
    std::size_t seq, begin, len;
  };
  std::vector<Chunk> chunks;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const std::size_t t_len = static_cast<std::size_t>(data[s].features.cols());
    for (std::size_t begin = 0; begin < t_len; begin += cfg.chunk_len) {
      const std::size_t len = std::min(cfg.chunk_len, t_len - begin);
      if (len >= 2) chunks.push_back({s, begin, len});
    }
  }
  if (chunks.empty()) throw std::invalid_argument("train: no usable chunks");

  Pcg64 gen(cfg.rng);
  TrainResult result;
  result.model = init_model(input_dim, cfg.hidden_dim, gen);

  LstmModel adam_m = zeros_like(result.model);
  LstmModel adam_v = zeros_like(result.model);
  const auto params = tensor_views(result.model);
  const auto m_views = tensor_views(adam_m);
  const auto v_views = tensor_views(adam_v);

  std::vector<std::size_t> order(chunks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t adam_step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates from the shared generator keeps runs bit-reproducible.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(gen.uniform_index(i));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    double correct = 0.0;
    std::size_t steps = 0;

    for (const std::size_t idx : order) {
      const Chunk& ch = chunks[idx];
      const Matrix features = data[ch.seq].features.middleCols(
          static_cast<Eigen::Index>(ch.begin), static_cast<Eigen::Index>(ch.len));
      const std::vector<int> labels(data[ch.seq].labels.begin() + static_cast<long>(ch.begin),
                                    data[ch.seq].labels.begin() +
                                        static_cast<long>(ch.begin + ch.len));

      Matrix probs;
      BackwardResult back = backward_impl(result.model, features, labels, &probs);
      if (!std::isfinite(back.loss))
        throw std::runtime_error("train: loss became non-finite at epoch " +
                                 std::to_string(epoch + 1));

      loss_sum += back.loss * static_cast<double>(ch.len);
      for (Eigen::Index t = 0; t < probs.cols(); ++t) {
        const int pred = probs(1, t) >= probs(0, t) ? 1 : 0;
        if (pred == labels[static_cast<std::size_t>(t)]) correct += 1.0;
      }
      steps += ch.len;

      const auto g_views = tensor_views(back.grads);
      double norm_sq = 0.0;
      for (const auto& g : g_views)
        for (std::size_t i = 0; i < g.size; ++i) norm_sq += g.data[i] * g.data[i];
      const double norm = std::sqrt(norm_sq);
      const double scale = norm > cfg.grad_clip_norm ? cfg.grad_clip_norm / norm : 1.0;

      ++adam_step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_step));
      for (std::size_t v = 0; v < params.size(); ++v) {
        double* p = params[v].data;
        double* mm = m_views[v].data;
        double* vv = v_views[v].data;
        const double* g = g_views[v].data;
        for (std::size_t i = 0; i < params[v].size; ++i) {
          const double gi = g[i] * scale;
          mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * gi;
          vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * gi * gi;
          p[i] -= cfg.learning_rate * (mm[i] / bc1) / (std::sqrt(vv[i] / bc2) + cfg.adam_eps);
        }
      }
    }

    result.history.push_back(EpochStats{loss_sum / static_cast<double>(steps),
                                        correct / static_cast<double>(steps)});
  }
  return result;
}

Matrix featurize(const sim::PricePath& path, const FeatureStats& stats) {
  if (path.prices.size() < 2)
    throw std::invalid_argument("featurize: need at least 2 prices");
  if (!std::isfinite(stats.mean) || !std::isfinite(stats.stddev) || stats.stddev <= 0.0)
    throw std::invalid_argument("featurize: invalid feature stats");
  const std::size_t n = path.prices.size() - 1;
  const double s0 = path.prices[0];
  Matrix features(2, static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const double prev = path.prices[j];
    const double cur = path.prices[j + 1];
    if (!std::isfinite(prev) || !std::isfinite(cur) || prev <= 0.0 || cur <= 0.0)
      throw std::invalid_argument("featurize: prices must be finite and > 0");
    features(0, static_cast<Eigen::Index>(j)) =
        (std::log(cur / prev) - stats.mean) / stats.stddev;
    features(1, static_cast<Eigen::Index>(j)) = cur / s0;
  }
  return features;
}

FeatureStats compute_feature_stats(const std::vector<sim::PricePath>& paths) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& path : paths) {
    for (std::size_t j = 0; j + 1 < path.prices.size(); ++j) {
      const double prev = path.prices[j];
      const double cur = path.prices[j + 1];
      if (!std::isfinite(prev) || !std::isfinite(cur) || prev <= 0.0 || cur <= 0.0)
        throw std::invalid_argument("compute_feature_stats: prices must be finite and > 0");
      sum += std::log(cur / prev);
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("compute_feature_stats: no returns");
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (const auto& path : paths) {
    for (std::size_t j = 0; j + 1 < path.prices.size(); ++j) {
      const double r = std::log(path.prices[j + 1] / path.prices[j]) - mean;
      var += r * r;
    }
  }
  var /= static_cast<double>(n);
  FeatureStats stats;
  stats.mean = mean;
  stats.stddev = var > 0.0 ? std::sqrt(var) : 1.0;  // constant corpus guard
  return stats;
}

ClassifyResult classify_sequence(const LstmModel& model, const sim::PricePath& path) {
  const Matrix features = featurize(path, model.feature_stats);
  const Matrix probs = network_forward(model, features);
  const std::size_t n = path.prices.size();

  ClassifyResult result;
  result.labels.resize(n);
  result.probs.resize(n);
  for (Eigen::Index t = 0; t < probs.cols(); ++t) {
    const std::size_t i = static_cast<std::size_t>(t) + 1;
    result.probs[i] = {probs(0, t), probs(1, t)};
    result.labels[i] = probs(1, t) >= probs(0, t) ? 1 : 0;
  }
  result.probs[0] = result.probs[1];
  result.labels[0] = result.labels[1];
  return result;
}

namespace {

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw std::invalid_argument("load_checkpoint: truncated checkpoint");
}

}  // namespace

void save_checkpoint(const LstmModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  const char magic[4] = {'B', 'L', 'N', 'N'};
  const std::uint32_t version = 1;
  const auto in_dim = static_cast<std::uint32_t>(model.input_dim);
  const auto hid_dim = static_cast<std::uint32_t>(model.hidden_dim);
  write_bytes(out, magic, 4);
  write_bytes(out, &version, 4);
  write_bytes(out, &in_dim, 4);
  write_bytes(out, &hid_dim, 4);
  write_bytes(out, &model.feature_stats.mean, 8);
  write_bytes(out, &model.feature_stats.stddev, 8);
  for (const auto& view : tensor_views(model))
    write_bytes(out, view.data, view.size * sizeof(double));
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

LstmModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("load_checkpoint: cannot open " + path);
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, "BLNN", 4) != 0)
    throw std::invalid_argument("load_checkpoint: not a bubblelab checkpoint");
  std::uint32_t version = 0, in_dim = 0, hid_dim = 0;
  read_bytes(in, &version, 4);
  if (version != 1)
    throw std::invalid_argument("load_checkpoint: unsupported checkpoint version " +
                                std::to_string(version));
  read_bytes(in, &in_dim, 4);
  read_bytes(in, &hid_dim, 4);
  if (in_dim == 0 || hid_dim == 0)
    throw std::invalid_argument("load_checkpoint: invalid dimensions");

  LstmModel model;
  model.input_dim = in_dim;
  model.hidden_dim = hid_dim;
  model = zeros_like(model);
  read_bytes(in, &model.feature_stats.mean, 8);
  read_bytes(in, &model.feature_stats.stddev, 8);
  for (const auto& view : tensor_views(model))
    read_bytes(in, view.data, view.size * sizeof(double));
  in.peek();
  if (!in.eof()) throw std::invalid_argument("load_checkpoint: trailing bytes");
  return model;
}

}  // namespace bubblelab::nnet
