#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cnf/featurize.hpp"
#include "cnf/matrix.hpp"

namespace cnf {

enum class Architecture { Flat, Hierarchical, ResNet };
enum class Task { Regression, Classification };
enum class Activation { Tanh, None };

std::string to_string(Architecture arch);
std::string to_string(Task task);
std::string to_string(Activation activation);
Architecture parse_architecture(const std::string& s);
Task parse_task(const std::string& s);
Activation parse_activation(const std::string& s);

struct ModelConfig {
  Architecture arch = Architecture::Flat;
  std::size_t depth = 2;                        // number of convolution + hashing blocks
  std::vector<std::size_t> kernel_widths{5};    // one entry, or one per block
  std::size_t filters = 32;                     // convolution output channels
  std::size_t embed_dim = 32;                   // hashing output width
  std::size_t head_hidden = 16;                 // 0 = linear head
  Task task = Task::Regression;
  Activation activation = Activation::Tanh;
  std::uint64_t seed = 42;
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;

  std::size_t kernel_width(std::size_t block) const {
    return kernel_widths.size() == 1 ? kernel_widths[0] : kernel_widths.at(block);
  }
  /// Throws Error(InvalidConfig) when an invariant is violated.
  void validate() const;
  std::size_t fingerprint_length() const;
  bool uses_input_hash() const { return arch != Architecture::Hierarchical; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct BlockParams {
  Matrix kernel;  // (width * in_channels) x filters; row t * in_channels + c
  Matrix hash;    // filters x embed_dim
  friend bool operator==(const BlockParams&, const BlockParams&) = default;
};

/// All weights of one network. Gradients use the same type.
struct Params {
  Matrix input_hash;               // V x E; flat block 0 and the resnet input injection
  std::vector<BlockParams> blocks;
  Matrix hidden_weight;            // head_hidden x fingerprint length
  std::vector<double> hidden_bias;
  std::vector<double> output_weight;
  std::vector<double> output_bias;  // single entry
  // Fixed affine map from the head output to the regression target scale,
  // set from the training targets; not trained.
  double target_shift = 0.0;
  double target_scale = 1.0;
  std::size_t vocab_size = 0;
  // Bumped by every optimiser step; forward caches remember it.
  std::uint64_t version = 0;

  /// Trainable tensors in a fixed order.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  /// Zero-valued tensors with the same shapes.
  Params zeros_like() const;

  bool all_finite() const;

  friend bool operator==(const Params&, const Params&) = default;
};

/// Seeded scaled-uniform initialisation, limit 1/sqrt(fan_in) where fan_in
/// counts the inputs that can be non-zero (one per tap for one-hot input).
Params init_params(const ModelConfig& config, std::size_t vocab_size);

/// Throws Error(ShapeMismatch) if the tensors do not fit the config.
void check_shapes(const Params& params, const ModelConfig& config, std::size_t vocab_size);

struct Fingerprint {
  std::vector<double> vector;
};

struct BlockCache {
  Matrix input;     // dense input (hierarchical/resnet blocks after the first)
  Matrix conv_out;  // valid_len x filters
  Matrix features;  // valid_len x embed_dim, after activation
};

/// Intermediates of one forward pass, needed by backward.
struct ForwardCache {
  std::vector<std::size_t> tokens;  // hot column of each valid row
  std::size_t vocab_size = 0;
  Matrix input_features;            // flat: block-0 features; resnet: X * H_0
  std::vector<BlockCache> blocks;
  std::vector<double> fingerprint;
  std::vector<double> hidden;       // head hidden activations
  double raw = 0.0;                 // head output before the target map / sigmoid
  double prediction = 0.0;
  std::uint64_t params_version = 0;
};

struct ForwardResult {
  Fingerprint fingerprint;
  double prediction = 0.0;
  ForwardCache cache;
};

/// 1-D convolution along rows with (width - 1) / 2 zero rows of padding on
/// each side. kernel is (width * Cin) x F.
Matrix conv_same(const Matrix& input, const Matrix& kernel, std::size_t width);

struct BlockOutput {
  Matrix features;
  std::vector<double> pooled;
};

/// Convolution, then hashing by H, then the activation; pooled sums the
/// first valid_len rows.
BlockOutput chp_block(const Matrix& input, const Matrix& kernel, std::size_t width, const Matrix& hash,
                      std::size_t valid_len, Activation activation = Activation::Tanh);

ForwardResult forward(const OneHot& x, const Params& params, const ModelConfig& config);
double predict(const OneHot& x, const Params& params, const ModelConfig& config);
Fingerprint fingerprint(const OneHot& x, const Params& params, const ModelConfig& config);

/// Squared error, or binary cross-entropy of a probability.
double loss(double prediction, double target, Task task);
/// Binary cross-entropy from the logit, in the softplus form.
double bce_with_logits(double logit, double target);
/// Loss of a cached forward pass against a target.
double cached_loss(const ForwardCache& cache, double target, const Params& params, Task task);
/// d loss / d raw head output.
double loss_gradient(const ForwardCache& cache, double target, const Params& params, Task task);

/// Reverse-mode gradients of (upstream * raw head output) for every
/// trainable tensor. Throws Error(StaleCache) if params changed since the
/// forward pass.
Params backward(const ForwardCache& cache, double upstream, const Params& params, const ModelConfig& config);
/// Same, added into `grad`.
void backward_into(const ForwardCache& cache, double upstream, const Params& params, const ModelConfig& config,
                   Params& grad);

struct Sample {
  OneHot x;
  double target = 0.0;
};

struct TrainingLog {
  double initial_loss = 0.0;       // mean loss before the first step
  std::vector<double> epoch_loss;  // running mean over each epoch
  std::size_t steps = 0;
};

struct FitResult {
  Params params;
  TrainingLog log;
};

using EpochCallback = std::function<void(std::size_t epoch, const Params& params)>;

/// Mini-batch Adam. Deterministic for a fixed config seed and sample order.
/// Throws Error(NonFiniteLoss) if training diverges.
FitResult fit(const std::vector<Sample>& train, const ModelConfig& config, const EpochCallback& on_epoch = {});

/// Mean loss of `params` over `data`.
double mean_loss(const std::vector<Sample>& data, const Params& params, const ModelConfig& config);

}  // namespace cnf
