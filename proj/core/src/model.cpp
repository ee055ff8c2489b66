#include "cnf/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cnf/error.hpp"
#include "cnf/random.hpp"

namespace cnf {

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::Flat: return "flat";
    case Architecture::Hierarchical: return "hierarchical";
    case Architecture::ResNet: return "resnet";
  }
  return "?";
}

std::string to_string(Task task) { return task == Task::Regression ? "regression" : "classification"; }

std::string to_string(Activation activation) { return activation == Activation::Tanh ? "tanh" : "none"; }

Architecture parse_architecture(const std::string& s) {
  if (s == "flat") return Architecture::Flat;
  if (s == "hierarchical") return Architecture::Hierarchical;
  if (s == "resnet") return Architecture::ResNet;
  throw Error(ErrorCode::InvalidConfig, "unknown architecture '" + s + "'");
}

Task parse_task(const std::string& s) {
  if (s == "regression") return Task::Regression;
  if (s == "classification") return Task::Classification;
  throw Error(ErrorCode::InvalidConfig, "unknown task '" + s + "'");
}

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "none") return Activation::None;
  throw Error(ErrorCode::InvalidConfig, "unknown activation '" + s + "'");
}

void ModelConfig::validate() const {
  if (depth < 1) throw Error(ErrorCode::InvalidConfig, "depth must be at least 1");
  if (kernel_widths.size() != 1 && kernel_widths.size() != depth)
    throw Error(ErrorCode::InvalidConfig, "kernel_widths needs one entry or one per block");
  for (std::size_t w : kernel_widths) {
    if (w == 0 || w % 2 == 0) throw Error(ErrorCode::InvalidConfig, "kernel widths must be odd and positive");
  }
  if (filters < 1 || embed_dim < 1) throw Error(ErrorCode::InvalidConfig, "filters and embed_dim must be positive");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
}

std::size_t ModelConfig::fingerprint_length() const {
  return (arch == Architecture::Flat ? depth + 1 : depth) * embed_dim;
}

// ---------------------------------------------------------------------------
// Params

std::vector<std::span<double>> Params::tensors() {
  std::vector<std::span<double>> out;
  out.push_back(input_hash.values());
  for (BlockParams& b : blocks) {
    out.push_back(b.kernel.values());
    out.push_back(b.hash.values());
  }
  out.push_back(hidden_weight.values());
  out.push_back(hidden_bias);
  out.push_back(output_weight);
  out.push_back(output_bias);
  return out;
}

std::vector<std::span<const double>> Params::tensors() const {
  std::vector<std::span<const double>> out;
  for (auto s : const_cast<Params*>(this)->tensors()) out.emplace_back(s.data(), s.size());
  return out;
}

Params Params::zeros_like() const {
  Params z = *this;
  for (auto t : z.tensors()) std::fill(t.begin(), t.end(), 0.0);
  return z;
}

bool Params::all_finite() const {
  for (auto t : tensors()) {
    for (double v : t) {
      if (!std::isfinite(v)) return false;
    }
  }
  return std::isfinite(target_shift) && std::isfinite(target_scale);
}

namespace {

void fill_uniform(std::span<double> values, double limit, Rng& rng) {
  for (double& v : values) v = (2.0 * uniform_unit(rng) - 1.0) * limit;
}

std::size_t block_in_channels(const ModelConfig& config, std::size_t block, std::size_t vocab_size) {
  if (block == 0 || config.arch == Architecture::Flat) return vocab_size;
  return config.embed_dim;
}

}  // namespace

Params init_params(const ModelConfig& config, std::size_t vocab_size) {
  config.validate();
  if (vocab_size == 0) throw Error(ErrorCode::ShapeMismatch, "vocabulary size must be positive");
  Rng rng(mix64(config.seed));
  Params p;
  p.vocab_size = vocab_size;
  const std::size_t E = config.embed_dim;
  const std::size_t F = config.filters;
  if (config.uses_input_hash()) {
    p.input_hash = Matrix(vocab_size, E);
    fill_uniform(p.input_hash.values(), 1.0, rng);
  }
  for (std::size_t k = 0; k < config.depth; ++k) {
    const std::size_t width = config.kernel_width(k);
    const std::size_t cin = block_in_channels(config, k, vocab_size);
    const bool one_hot_input = cin == vocab_size && (k == 0 || config.arch == Architecture::Flat);
    BlockParams b{Matrix(width * cin, F), Matrix(F, E)};
    fill_uniform(b.kernel.values(), 1.0 / std::sqrt(static_cast<double>(one_hot_input ? width : width * cin)), rng);
    fill_uniform(b.hash.values(), 1.0 / std::sqrt(static_cast<double>(F)), rng);
    p.blocks.push_back(std::move(b));
  }
  const std::size_t D = config.fingerprint_length();
  if (config.head_hidden > 0) {
    p.hidden_weight = Matrix(config.head_hidden, D);
    fill_uniform(p.hidden_weight.values(), 1.0 / std::sqrt(static_cast<double>(D)), rng);
    p.hidden_bias.assign(config.head_hidden, 0.0);
    p.output_weight.resize(config.head_hidden);
    fill_uniform(p.output_weight, 1.0 / std::sqrt(static_cast<double>(config.head_hidden)), rng);
  } else {
    p.output_weight.resize(D);
    fill_uniform(p.output_weight, 1.0 / std::sqrt(static_cast<double>(D)), rng);
  }
  p.output_bias.assign(1, 0.0);
  return p;
}

void check_shapes(const Params& params, const ModelConfig& config, std::size_t vocab_size) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ShapeMismatch, what); };
  const std::size_t E = config.embed_dim;
  const std::size_t F = config.filters;
  if (params.vocab_size != vocab_size)
    fail("input has " + std::to_string(vocab_size) + " columns but the model expects " +
         std::to_string(params.vocab_size));
  if (config.uses_input_hash() && (params.input_hash.rows() != vocab_size || params.input_hash.cols() != E))
    fail("input hash matrix has the wrong shape");
  if (params.blocks.size() != config.depth) fail("block count does not match depth");
  for (std::size_t k = 0; k < config.depth; ++k) {
    const auto& b = params.blocks[k];
    const std::size_t cin = block_in_channels(config, k, vocab_size);
    if (b.kernel.rows() != config.kernel_width(k) * cin || b.kernel.cols() != F)
      fail("kernel " + std::to_string(k) + " has the wrong shape");
    if (b.hash.rows() != F || b.hash.cols() != E) fail("hash matrix " + std::to_string(k) + " has the wrong shape");
  }
  const std::size_t D = config.fingerprint_length();
  const std::size_t head_in = config.head_hidden > 0 ? config.head_hidden : D;
  if (config.head_hidden > 0 &&
      (params.hidden_weight.rows() != config.head_hidden || params.hidden_weight.cols() != D ||
       params.hidden_bias.size() != config.head_hidden))
    fail("head hidden layer has the wrong shape");
  if (params.output_weight.size() != head_in || params.output_bias.size() != 1) fail("head output has the wrong shape");
}

// ---------------------------------------------------------------------------
// Building blocks

namespace {

double activate(double v, Activation a) { return a == Activation::Tanh ? std::tanh(v) : v; }

// Derivative expressed through the activation's output.
double activation_slope(double out, Activation a) { return a == Activation::Tanh ? 1.0 - out * out : 1.0; }

// Convolution of one-hot rows given by their hot columns.
Matrix conv_tokens(const std::vector<std::size_t>& tokens, const Matrix& kernel, std::size_t width,
                   std::size_t vocab_size) {
  const std::size_t L = tokens.size();
  const std::size_t F = kernel.cols();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(width / 2);
  Matrix out(L, F);
  for (std::size_t i = 0; i < L; ++i) {
    double* o = out.row(i);
    for (std::size_t t = 0; t < width; ++t) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(t) - pad;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(L)) continue;
      const double* k = kernel.row(t * vocab_size + tokens[static_cast<std::size_t>(j)]);
      for (std::size_t f = 0; f < F; ++f) o[f] += k[f];
    }
  }
  return out;
}

Matrix conv_dense(const Matrix& input, const Matrix& kernel, std::size_t width) {
  const std::size_t L = input.rows();
  const std::size_t cin = input.cols();
  const std::size_t F = kernel.cols();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(width / 2);
  Matrix out(L, F);
  for (std::size_t i = 0; i < L; ++i) {
    double* o = out.row(i);
    for (std::size_t t = 0; t < width; ++t) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(t) - pad;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(L)) continue;
      const double* in = input.row(static_cast<std::size_t>(j));
      for (std::size_t c = 0; c < cin; ++c) {
        const double v = in[c];
        if (v == 0.0) continue;
        const double* k = kernel.row(t * cin + c);
        for (std::size_t f = 0; f < F; ++f) o[f] += v * k[f];
      }
    }
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i);
    const double* ai = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = ai[k];
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += v * bk[j];
    }
  }
  return out;
}

void apply_activation(Matrix& m, Activation a) {
  if (a == Activation::None) return;
  for (double& v : m.values()) v = std::tanh(v);
}

void pool_into(const Matrix& features, std::size_t rows, double* dst) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* r = features.row(i);
    for (std::size_t e = 0; e < features.cols(); ++e) dst[e] += r[e];
  }
}

Matrix gather_rows(const Matrix& table, const std::vector<std::size_t>& tokens) {
  Matrix out(tokens.size(), table.cols());
  for (std::size_t i = 0; i < tokens.size(); ++i) std::copy_n(table.row(tokens[i]), table.cols(), out.row(i));
  return out;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// The network only ever sees the valid rows: PAD rows act as zero input, so
// appending PAD rows is the same as the zero padding of the convolution.
ForwardCache run_forward(const OneHot& x, const Params& params, const ModelConfig& config) {
  check_shapes(params, config, x.cols);
  ForwardCache c;
  c.vocab_size = x.cols;
  c.params_version = params.version;
  c.tokens.assign(x.tokens.begin(), x.tokens.begin() + static_cast<std::ptrdiff_t>(x.valid_len));
  const std::size_t E = config.embed_dim;
  const std::size_t L = c.tokens.size();
  c.fingerprint.assign(config.fingerprint_length(), 0.0);
  std::size_t offset = 0;

  if (config.uses_input_hash()) {
    c.input_features = gather_rows(params.input_hash, c.tokens);
    if (config.arch == Architecture::Flat) {
      apply_activation(c.input_features, config.activation);
      pool_into(c.input_features, L, c.fingerprint.data());
      offset += E;
    }
  }

  c.blocks.resize(config.depth);
  for (std::size_t k = 0; k < config.depth; ++k) {
    BlockCache& b = c.blocks[k];
    const BlockParams& bp = params.blocks[k];
    const std::size_t width = config.kernel_width(k);
    if (k == 0 || config.arch == Architecture::Flat) {
      b.conv_out = conv_tokens(c.tokens, bp.kernel, width, x.cols);
    } else {
      b.input = c.blocks[k - 1].features;
      if (config.arch == Architecture::ResNet) {
        auto in = b.input.values();
        auto inj = c.input_features.values();
        for (std::size_t i = 0; i < in.size(); ++i) in[i] += inj[i];
      }
      b.conv_out = conv_dense(b.input, bp.kernel, width);
    }
    b.features = matmul(b.conv_out, bp.hash);
    apply_activation(b.features, config.activation);
    pool_into(b.features, L, c.fingerprint.data() + offset);
    offset += E;
  }

  const std::vector<double>& fp = c.fingerprint;
  double raw = params.output_bias[0];
  if (config.head_hidden > 0) {
    c.hidden.assign(config.head_hidden, 0.0);
    for (std::size_t h = 0; h < config.head_hidden; ++h) {
      const double* w = params.hidden_weight.row(h);
      double z = params.hidden_bias[h];
      for (std::size_t d = 0; d < fp.size(); ++d) z += w[d] * fp[d];
      c.hidden[h] = activate(z, config.activation);
      raw += params.output_weight[h] * c.hidden[h];
    }
  } else {
    for (std::size_t d = 0; d < fp.size(); ++d) raw += params.output_weight[d] * fp[d];
  }
  if (!std::isfinite(raw)) throw Error(ErrorCode::NonFiniteActivation, "head output is not finite");
  c.raw = raw;
  c.prediction = config.task == Task::Classification ? sigmoid(raw) : params.target_shift + params.target_scale * raw;
  return c;
}

}  // namespace

Matrix conv_same(const Matrix& input, const Matrix& kernel, std::size_t width) {
  if (width % 2 == 0) throw Error(ErrorCode::ShapeMismatch, "kernel width must be odd");
  if (kernel.rows() != width * input.cols())
    throw Error(ErrorCode::ShapeMismatch, "kernel rows must equal width * input channels");
  return conv_dense(input, kernel, width);
}

BlockOutput chp_block(const Matrix& input, const Matrix& kernel, std::size_t width, const Matrix& hash,
                      std::size_t valid_len, Activation activation) {
  if (hash.rows() != kernel.cols()) throw Error(ErrorCode::ShapeMismatch, "hash rows must equal kernel filters");
  if (valid_len > input.rows()) throw Error(ErrorCode::ShapeMismatch, "valid_len exceeds the input length");
  BlockOutput out;
  out.features = matmul(conv_same(input, kernel, width), hash);
  apply_activation(out.features, activation);
  out.pooled.assign(hash.cols(), 0.0);
  pool_into(out.features, valid_len, out.pooled.data());
  return out;
}

ForwardResult forward(const OneHot& x, const Params& params, const ModelConfig& config) {
  ForwardResult r;
  r.cache = run_forward(x, params, config);
  r.fingerprint.vector = r.cache.fingerprint;
  r.prediction = r.cache.prediction;
  return r;
}

double predict(const OneHot& x, const Params& params, const ModelConfig& config) {
  return run_forward(x, params, config).prediction;
}

Fingerprint fingerprint(const OneHot& x, const Params& params, const ModelConfig& config) {
  return Fingerprint{run_forward(x, params, config).fingerprint};
}

// ---------------------------------------------------------------------------
// Loss

double bce_with_logits(double logit, double target) {
  // softplus(z) - y z, with softplus(z) = max(z, 0) + log1p(exp(-|z|))
  return std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit))) - target * logit;
}

double loss(double prediction, double target, Task task) {
  if (task == Task::Regression) {
    const double d = prediction - target;
    return d * d;
  }
  double l = 0.0;
  if (target > 0.0) l -= target * std::log(prediction);
  if (target < 1.0) l -= (1.0 - target) * std::log1p(-prediction);
  return l;
}

double cached_loss(const ForwardCache& cache, double target, const Params& params, Task task) {
  (void)params;
  if (task == Task::Classification) return bce_with_logits(cache.raw, target);
  return loss(cache.prediction, target, task);
}

double loss_gradient(const ForwardCache& cache, double target, const Params& params, Task task) {
  if (task == Task::Classification) return sigmoid(cache.raw) - target;
  return 2.0 * (cache.prediction - target) * params.target_scale;
}

// ---------------------------------------------------------------------------
// Backward

void backward_into(const ForwardCache& cache, double upstream, const Params& params, const ModelConfig& config,
                   Params& grad) {
  if (cache.params_version != params.version || cache.vocab_size != params.vocab_size ||
      cache.blocks.size() != config.depth)
    throw Error(ErrorCode::StaleCache, "forward cache does not belong to these parameters");
  const std::size_t E = config.embed_dim;
  const std::size_t F = config.filters;
  const std::size_t L = cache.tokens.size();
  const std::size_t D = cache.fingerprint.size();
  const Activation act = config.activation;

  // Head
  std::vector<double> d_fp(D, 0.0);
  grad.output_bias[0] += upstream;
  if (config.head_hidden > 0) {
    for (std::size_t h = 0; h < config.head_hidden; ++h) {
      grad.output_weight[h] += upstream * cache.hidden[h];
      const double dz = upstream * params.output_weight[h] * activation_slope(cache.hidden[h], act);
      grad.hidden_bias[h] += dz;
      double* gw = grad.hidden_weight.row(h);
      const double* w = params.hidden_weight.row(h);
      for (std::size_t d = 0; d < D; ++d) {
        gw[d] += dz * cache.fingerprint[d];
        d_fp[d] += dz * w[d];
      }
    }
  } else {
    for (std::size_t d = 0; d < D; ++d) {
      grad.output_weight[d] += upstream * cache.fingerprint[d];
      d_fp[d] = upstream * params.output_weight[d];
    }
  }

  const std::size_t first_block_offset = config.arch == Architecture::Flat ? E : 0;
  Matrix d_injection;  // resnet: gradient w.r.t. X * H_0
  if (config.arch == Architecture::ResNet) d_injection = Matrix(L, E);

  // Gradient w.r.t. the features of the block being processed, seeded by
  // pooling (every valid row receives the pooled gradient).
  Matrix d_features(L, E);
  auto seed_from_pool = [&](Matrix& m, std::size_t offset) {
    for (std::size_t i = 0; i < L; ++i) {
      double* r = m.row(i);
      for (std::size_t e = 0; e < E; ++e) r[e] += d_fp[offset + e];
    }
  };

  for (std::size_t kk = config.depth; kk-- > 0;) {
    const BlockCache& b = cache.blocks[kk];
    const BlockParams& bp = params.blocks[kk];
    BlockParams& gb = grad.blocks[kk];
    const std::size_t width = config.kernel_width(kk);
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(width / 2);

    seed_from_pool(d_features, first_block_offset + kk * E);

    // d pre-activation, in place
    Matrix& d_pre = d_features;
    for (std::size_t i = 0; i < L; ++i) {
      double* r = d_pre.row(i);
      const double* out = b.features.row(i);
      for (std::size_t e = 0; e < E; ++e) r[e] *= activation_slope(out[e], act);
    }

    // hash: pre = conv_out * H
    Matrix d_conv(L, F);
    for (std::size_t i = 0; i < L; ++i) {
      const double* u = b.conv_out.row(i);
      const double* dp = d_pre.row(i);
      double* du = d_conv.row(i);
      for (std::size_t f = 0; f < F; ++f) {
        double* gh = gb.hash.row(f);
        const double* h = bp.hash.row(f);
        double acc = 0.0;
        for (std::size_t e = 0; e < E; ++e) {
          gh[e] += u[f] * dp[e];
          acc += h[e] * dp[e];
        }
        du[f] = acc;
      }
    }

    const bool token_input = kk == 0 || config.arch == Architecture::Flat;
    Matrix d_input;
    if (token_input) {
      for (std::size_t i = 0; i < L; ++i) {
        const double* du = d_conv.row(i);
        for (std::size_t t = 0; t < width; ++t) {
          const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(t) - pad;
          if (j < 0 || j >= static_cast<std::ptrdiff_t>(L)) continue;
          double* gk = gb.kernel.row(t * cache.vocab_size + cache.tokens[static_cast<std::size_t>(j)]);
          for (std::size_t f = 0; f < F; ++f) gk[f] += du[f];
        }
      }
    } else {
      const std::size_t cin = b.input.cols();
      d_input = Matrix(L, cin);
      for (std::size_t i = 0; i < L; ++i) {
        const double* du = d_conv.row(i);
        for (std::size_t t = 0; t < width; ++t) {
          const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(t) - pad;
          if (j < 0 || j >= static_cast<std::ptrdiff_t>(L)) continue;
          const double* in = b.input.row(static_cast<std::size_t>(j));
          double* din = d_input.row(static_cast<std::size_t>(j));
          for (std::size_t c = 0; c < cin; ++c) {
            double* gk = gb.kernel.row(t * cin + c);
            const double* k = bp.kernel.row(t * cin + c);
            const double v = in[c];
            double acc = 0.0;
            for (std::size_t f = 0; f < F; ++f) {
              gk[f] += v * du[f];
              acc += k[f] * du[f];
            }
            din[c] += acc;
          }
        }
      }
    }

    // Route the input gradient to the previous block (and the injection).
    d_features = Matrix(L, E);
    if (!token_input) {
      d_features = d_input;
      if (config.arch == Architecture::ResNet) {
        auto dst = d_injection.values();
        auto src = d_input.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      }
    }
  }

  if (config.arch == Architecture::Flat) {
    // block 0: features = act(X * H_0)
    seed_from_pool(d_features, 0);
    for (std::size_t i = 0; i < L; ++i) {
      const double* dr = d_features.row(i);
      const double* out = cache.input_features.row(i);
      double* g = grad.input_hash.row(cache.tokens[i]);
      for (std::size_t e = 0; e < E; ++e) g[e] += dr[e] * activation_slope(out[e], act);
    }
  } else if (config.arch == Architecture::ResNet) {
    for (std::size_t i = 0; i < L; ++i) {
      const double* dr = d_injection.row(i);
      double* g = grad.input_hash.row(cache.tokens[i]);
      for (std::size_t e = 0; e < E; ++e) g[e] += dr[e];
    }
  }
}

Params backward(const ForwardCache& cache, double upstream, const Params& params, const ModelConfig& config) {
  Params grad = params.zeros_like();
  backward_into(cache, upstream, params, config, grad);
  return grad;
}

// ---------------------------------------------------------------------------
// Training

double mean_loss(const std::vector<Sample>& data, const Params& params, const ModelConfig& config) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const Sample& s : data) total += cached_loss(run_forward(s.x, params, config), s.target, params, config.task);
  return total / static_cast<double>(data.size());
}

namespace {

struct Adam {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  explicit Adam(const Params& shape) : m(shape.zeros_like()), v(shape.zeros_like()) {}

  void step(Params& params, const Params& grad, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    auto p = params.tensors();
    auto g = grad.tensors();
    auto mt = m.tensors();
    auto vt = v.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) {
      for (std::size_t i = 0; i < p[k].size(); ++i) {
        const double gi = g[k][i];
        mt[k][i] = kBeta1 * mt[k][i] + (1.0 - kBeta1) * gi;
        vt[k][i] = kBeta2 * vt[k][i] + (1.0 - kBeta2) * gi * gi;
        p[k][i] -= lr * (mt[k][i] / c1) / (std::sqrt(vt[k][i] / c2) + kEpsilon);
      }
    }
    ++params.version;
  }

  Params m;
  Params v;
  std::uint64_t t = 0;
};

}  // namespace

FitResult fit(const std::vector<Sample>& train, const ModelConfig& config, const EpochCallback& on_epoch) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "no training samples");
  config.validate();
  const std::size_t vocab_size = train.front().x.cols;
  for (const Sample& s : train) {
    if (s.x.cols != vocab_size) throw Error(ErrorCode::ShapeMismatch, "training samples disagree on vocabulary size");
    if (config.task == Task::Classification && s.target != 0.0 && s.target != 1.0)
      throw Error(ErrorCode::InvalidConfig, "classification targets must be 0 or 1");
  }

  FitResult result;
  Params& params = result.params;
  params = init_params(config, vocab_size);
  if (config.task == Task::Regression) {
    double mean = 0.0;
    for (const Sample& s : train) mean += s.target;
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (const Sample& s : train) var += (s.target - mean) * (s.target - mean);
    var /= static_cast<double>(train.size());
    params.target_shift = mean;
    params.target_scale = var > 0.0 ? std::sqrt(var) : 1.0;
  }

  result.log.initial_loss = mean_loss(train, params, config);
  if (!std::isfinite(result.log.initial_loss)) throw Error(ErrorCode::NonFiniteLoss, "initial loss is not finite");

  Adam adam(params);
  Rng rng(mix64(config.seed ^ 0x5eedf00dULL));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Params grad = params.zeros_like();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (auto t : grad.tensors()) std::fill(t.begin(), t.end(), 0.0);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = train[order[i]];
        const ForwardCache cache = run_forward(s.x, params, config);
        const double l = cached_loss(cache, s.target, params, config.task);
        if (!std::isfinite(l))
          throw Error(ErrorCode::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch) + ", sample " +
                                                    std::to_string(order[i]));
        epoch_total += l;
        backward_into(cache, inv * loss_gradient(cache, s.target, params, config.task), params, config, grad);
      }
      adam.step(params, grad, config.learning_rate);
      ++result.log.steps;
    }
    result.log.epoch_loss.push_back(epoch_total / static_cast<double>(train.size()));
    if (on_epoch) on_epoch(epoch, params);
  }
  return result;
}

}  // namespace cnf
