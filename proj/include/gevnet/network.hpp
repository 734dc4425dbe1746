#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gevnet/gev.hpp"
#include "gevnet/summaries.hpp"

namespace gevnet {

enum class Activation { relu, tanh, linear, custom_output };

// Fully-connected layer, weights row-major (out_dim x in_dim).
struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;
  std::vector<double> biases;
  Activation activation = Activation::linear;
};

// Range constants of the output activation: mu' = s_mu * tanh(r0),
// sigma' = max(relu(r1), sigma_floor), xi = s_xi * tanh(r2).
struct OutputScales {
  double s_mu = 10.0;
  double s_xi = 0.5;
};

struct TrainingMetadata {
  int epochs_run = 0;
  int best_epoch = -1;
  double final_valid_loss = 0.0;
  double training_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string scenario;
};

struct NetworkModel {
  std::vector<DenseLayer> layers;
  OutputScales output_scales;
  double sigma_floor = 1e-6;
  PercentileSet pset = PercentileSet::standard();
  TrainingMetadata metadata;

  std::size_t input_dim() const { return layers.front().in_dim; }
  std::size_t output_dim() const { return layers.back().out_dim; }
  std::size_t parameter_count() const;

  // Glorot-uniform initialized network with relu hidden layers and a
  // custom_output head: dims = {in, hidden..., out}.
  static NetworkModel make(const std::vector<std::size_t>& dims, std::uint64_t seed,
                           OutputScales scales = {}, double sigma_floor = 1e-6,
                           PercentileSet pset = PercentileSet::standard());

  // The reference architecture: 11 -> 128 x4 -> 3 (51,459 parameters).
  static NetworkModel standard(std::uint64_t seed);
};

// One simulated training case: network input summary plus the target on the
// standardized scale.
struct TrainingRecord {
  QuantileSummary summary;
  GevParams target_std;
  std::size_t sample_size = 0;
};

enum class PenaltyMode { indicator, hinge };

GevParams output_activation(const std::array<double, 3>& raw, const OutputScales& scales,
                            double sigma_floor);

// Per-layer pre-activations and activations kept for backpropagation;
// act[0] is the input.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
};

// Plain affine/activation stack, any output width (used by tests and by the
// custom_output path, which consumes a width-3 raw vector).
std::vector<double> forward_raw(const NetworkModel& model, std::span<const double> input);

struct ForwardResult {
  std::array<double, 3> raw;
  GevParams params_std;
};

// Full inference pass: hidden stack + output activation. Requires
// output_dim == 3 and finite inputs of length input_dim.
ForwardResult forward(const NetworkModel& model, std::span<const double> input);
ForwardResult forward_traced(const NetworkModel& model, std::span<const double> input,
                             ForwardTrace& trace);

struct BatchLoss {
  double mse = 0.0;      // batch mean of the squared 3-vector parameter errors
  double penalty = 0.0;  // indicator: 0/1; hinge: mean surrogate value
  double total = 0.0;    // mse + lambda * penalty
};

BatchLoss batch_loss(std::span<const GevParams> preds, std::span<const GevParams> targets,
                     std::span<const TrainingRecord> records, double lambda,
                     PenaltyMode mode);

struct LayerGrads {
  std::vector<double> weights;
  std::vector<double> biases;
};

struct Gradients {
  std::vector<LayerGrads> layers;

  static Gradients zeros_like(const NetworkModel& model);
  void zero();
  void add(const Gradients& other);
};

// Exact reverse-mode gradients of batch_loss w.r.t. all weights and biases.
// The indicator penalty is piecewise constant and contributes no gradient;
// the hinge surrogate contributes its subgradient (relu' (0) = 0).
Gradients backward(const NetworkModel& model, std::span<const TrainingRecord> batch,
                   double lambda, PenaltyMode mode);

// backward plus the losses of the same pass (hinge-mode total used for
// optimization, indicator-mode total for reporting).
struct BatchEval {
  Gradients grads;
  BatchLoss optimized;  // in the requested mode
  BatchLoss indicator;  // always indicator semantics
};
BatchEval backward_with_loss(const NetworkModel& model, std::span<const TrainingRecord> batch,
                             double lambda, PenaltyMode mode);

// RMSprop: v <- rho v + (1-rho) g^2; w <- w - lr g / (sqrt(v) + eps).
struct OptimizerState {
  std::vector<LayerGrads> accum;
  double rho = 0.9;
  double epsilon = 1e-8;
  double learning_rate = 0.001;

  static OptimizerState init(const NetworkModel& model, double learning_rate = 0.001,
                             double rho = 0.9, double epsilon = 1e-8);
};

void rmsprop_step(OptimizerState& state, NetworkModel& model, const Gradients& grads);

// Versioned JSON model container; doubles survive the round trip bit-exactly.
class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ModelVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ModelDimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_model(const NetworkModel& model);
NetworkModel deserialize_model(const std::string& text);
void save_model(const NetworkModel& model, const std::string& path);
NetworkModel load_model(const std::string& path);

}  // namespace gevnet
