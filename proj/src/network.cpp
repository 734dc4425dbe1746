#include "gevnet/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gevnet/rng.hpp"
#include "json.hpp"

namespace gevnet {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu:
      return z > 0.0 ? z : 0.0;
    case Activation::tanh:
      return std::tanh(z);
    case Activation::linear:
    case Activation::custom_output:
      return z;
  }
  return z;
}

// Derivative in terms of pre-activation z and activation value a.
double activate_grad(Activation act, double z, double a) {
  switch (act) {
    case Activation::relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh:
      return 1.0 - a * a;
    case Activation::linear:
    case Activation::custom_output:
      return 1.0;
  }
  return 1.0;
}

// tanh clamped strictly inside (-1, 1) so the mapped shape stays inside the
// open output band even when tanh saturates to +/-1 in double precision.
double tanh_interior(double z) {
  double t = std::tanh(z);
  if (t >= 1.0) t = std::nextafter(1.0, 0.0);
  if (t <= -1.0) t = std::nextafter(-1.0, 0.0);
  return t;
}

}  // namespace

std::size_t NetworkModel::parameter_count() const {
  std::size_t count = 0;
  for (const auto& l : layers) count += l.in_dim * l.out_dim + l.out_dim;
  return count;
}

NetworkModel NetworkModel::make(const std::vector<std::size_t>& dims, std::uint64_t seed,
                                OutputScales scales, double sigma_floor,
                                PercentileSet pset) {
  if (dims.size() < 2) throw std::invalid_argument("network needs at least one layer");
  if (!(sigma_floor > 0.0)) throw std::invalid_argument("sigma_floor must be > 0");

  NetworkModel model;
  model.output_scales = scales;
  model.sigma_floor = sigma_floor;
  model.pset = pset;
  model.metadata.seed = seed;

  SplitMix64 rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.in_dim = dims[l];
    layer.out_dim = dims[l + 1];
    layer.activation =
        (l + 2 == dims.size()) ? Activation::custom_output : Activation::relu;
    layer.weights.resize(layer.in_dim * layer.out_dim);
    layer.biases.assign(layer.out_dim, 0.0);
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.out_dim));
    for (double& w : layer.weights) w = rng.next_uniform(-limit, limit);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

NetworkModel NetworkModel::standard(std::uint64_t seed) {
  return make({11, 128, 128, 128, 128, 3}, seed);
}

GevParams output_activation(const std::array<double, 3>& raw, const OutputScales& scales,
                            double sigma_floor) {
  const double mu = scales.s_mu * tanh_interior(raw[0]);
  const double sigma = std::max(raw[1] > 0.0 ? raw[1] : 0.0, sigma_floor);
  const double xi = scales.s_xi * tanh_interior(raw[2]);
  return GevParams::unchecked(mu, sigma, xi);
}

namespace {

void run_stack(const NetworkModel& model, std::span<const double> input, ForwardTrace& trace) {
  if (input.size() != model.input_dim()) {
    throw std::invalid_argument("forward: input length does not match input_dim");
  }
  for (double v : input) {
    if (!std::isfinite(v)) throw std::domain_error("forward: non-finite input");
  }

  const std::size_t n_layers = model.layers.size();
  trace.pre.resize(n_layers);
  trace.act.resize(n_layers + 1);
  trace.act[0].assign(input.begin(), input.end());

  for (std::size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = model.layers[l];
    const std::vector<double>& in = trace.act[l];
    std::vector<double>& pre = trace.pre[l];
    std::vector<double>& out = trace.act[l + 1];
    pre.assign(layer.out_dim, 0.0);
    out.resize(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      const double* wrow = layer.weights.data() + o * layer.in_dim;
      double acc = layer.biases[o];
      for (std::size_t i = 0; i < layer.in_dim; ++i) acc += wrow[i] * in[i];
      pre[o] = acc;
      out[o] = activate(layer.activation, acc);
    }
  }
}

}  // namespace

std::vector<double> forward_raw(const NetworkModel& model, std::span<const double> input) {
  ForwardTrace trace;
  run_stack(model, input, trace);
  return trace.act.back();
}

ForwardResult forward_traced(const NetworkModel& model, std::span<const double> input,
                             ForwardTrace& trace) {
  if (model.output_dim() != 3) {
    throw std::invalid_argument("forward: output layer must have width 3");
  }
  run_stack(model, input, trace);
  const std::vector<double>& raw = trace.act.back();
  const std::array<double, 3> r{raw[0], raw[1], raw[2]};
  return ForwardResult{r, output_activation(r, model.output_scales, model.sigma_floor)};
}

ForwardResult forward(const NetworkModel& model, std::span<const double> input) {
  ForwardTrace trace;
  return forward_traced(model, input, trace);
}

namespace {

struct SupportGaps {
  double at_min = 0.0;
  double at_max = 0.0;
};

// g = sigma' + xi (y - mu') evaluated at the standardized sample extremes;
// the prediction satisfies the whole sample's support constraint iff both
// gaps are positive.
SupportGaps support_gaps(const GevParams& pred, const QuantileSummary& summary) {
  return {pred.sigma + pred.xi * (summary.sample_min - pred.mu),
          pred.sigma + pred.xi * (summary.sample_max - pred.mu)};
}

}  // namespace

BatchLoss batch_loss(std::span<const GevParams> preds, std::span<const GevParams> targets,
                     std::span<const TrainingRecord> records, double lambda,
                     PenaltyMode mode) {
  if (preds.size() != targets.size() || preds.size() != records.size()) {
    throw std::invalid_argument("batch_loss: length mismatch");
  }
  if (preds.empty()) throw std::invalid_argument("batch_loss: empty batch");
  if (lambda < 0.0) throw std::invalid_argument("batch_loss: lambda must be >= 0");

  const double n = static_cast<double>(preds.size());
  double mse_sum = 0.0;
  double hinge_sum = 0.0;
  bool violated = false;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double dmu = preds[i].mu - targets[i].mu;
    const double dsig = preds[i].sigma - targets[i].sigma;
    const double dxi = preds[i].xi - targets[i].xi;
    mse_sum += dmu * dmu + dsig * dsig + dxi * dxi;

    const SupportGaps g = support_gaps(preds[i], records[i].summary);
    violated = violated || g.at_min <= 0.0 || g.at_max <= 0.0;
    hinge_sum += (g.at_min < 0.0 ? -g.at_min : 0.0) + (g.at_max < 0.0 ? -g.at_max : 0.0);
  }

  BatchLoss out;
  out.mse = mse_sum / n;
  out.penalty = mode == PenaltyMode::indicator ? (violated ? 1.0 : 0.0) : hinge_sum / n;
  out.total = out.mse + lambda * out.penalty;
  return out;
}

Gradients Gradients::zeros_like(const NetworkModel& model) {
  Gradients g;
  g.layers.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    g.layers[l].weights.assign(model.layers[l].weights.size(), 0.0);
    g.layers[l].biases.assign(model.layers[l].biases.size(), 0.0);
  }
  return g;
}

void Gradients::zero() {
  for (auto& l : layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.biases.begin(), l.biases.end(), 0.0);
  }
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
      layers[l].weights[i] += other.layers[l].weights[i];
    }
    for (std::size_t i = 0; i < layers[l].biases.size(); ++i) {
      layers[l].biases[i] += other.layers[l].biases[i];
    }
  }
}

BatchEval backward_with_loss(const NetworkModel& model, std::span<const TrainingRecord> batch,
                             double lambda, PenaltyMode mode) {
  if (batch.empty()) throw std::invalid_argument("backward: empty batch");
  if (model.output_dim() != 3) {
    throw std::invalid_argument("backward: output layer must have width 3");
  }

  const std::size_t n_layers = model.layers.size();
  const double n = static_cast<double>(batch.size());
  Gradients grads = Gradients::zeros_like(model);

  double mse_sum = 0.0;
  double hinge_sum = 0.0;
  bool violated = false;

  ForwardTrace trace;
  std::vector<double> delta, delta_prev;
  for (const TrainingRecord& rec : batch) {
    const ForwardResult fr = forward_traced(model, rec.summary.percentiles, trace);
    const GevParams& pred = fr.params_std;
    const GevParams& target = rec.target_std;

    const double dmu = pred.mu - target.mu;
    const double dsig = pred.sigma - target.sigma;
    const double dxi = pred.xi - target.xi;
    mse_sum += dmu * dmu + dsig * dsig + dxi * dxi;

    // Loss gradient w.r.t. the activated outputs (mu', sigma', xi).
    double g_mu = 2.0 * dmu / n;
    double g_sig = 2.0 * dsig / n;
    double g_xi = 2.0 * dxi / n;

    const SupportGaps gaps = support_gaps(pred, rec.summary);
    violated = violated || gaps.at_min <= 0.0 || gaps.at_max <= 0.0;
    hinge_sum += (gaps.at_min < 0.0 ? -gaps.at_min : 0.0) +
                 (gaps.at_max < 0.0 ? -gaps.at_max : 0.0);
    if (mode == PenaltyMode::hinge && lambda > 0.0) {
      const double w = lambda / n;
      if (gaps.at_min < 0.0) {
        g_mu += w * pred.xi;
        g_sig -= w;
        g_xi -= w * (rec.summary.sample_min - pred.mu);
      }
      if (gaps.at_max < 0.0) {
        g_mu += w * pred.xi;
        g_sig -= w;
        g_xi -= w * (rec.summary.sample_max - pred.mu);
      }
    }

    // Through the output activation onto the raw head.
    const double t0 = std::tanh(fr.raw[0]);
    const double t2 = std::tanh(fr.raw[2]);
    delta.assign(3, 0.0);
    delta[0] = g_mu * model.output_scales.s_mu * (1.0 - t0 * t0);
    delta[1] = fr.raw[1] > model.sigma_floor ? g_sig : 0.0;
    delta[2] = g_xi * model.output_scales.s_xi * (1.0 - t2 * t2);

    // Backpropagate through the dense stack.
    for (std::size_t li = n_layers; li-- > 0;) {
      const DenseLayer& layer = model.layers[li];
      LayerGrads& lg = grads.layers[li];
      const std::vector<double>& in_act = trace.act[li];
      for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        lg.biases[o] += d;
        double* wg = lg.weights.data() + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) wg[i] += d * in_act[i];
      }
      if (li == 0) break;

      const DenseLayer& prev = model.layers[li - 1];
      delta_prev.assign(layer.in_dim, 0.0);
      for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* wrow = layer.weights.data() + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) delta_prev[i] += wrow[i] * d;
      }
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        delta_prev[i] *= activate_grad(prev.activation, trace.pre[li - 1][i],
                                       trace.act[li][i]);
      }
      delta.swap(delta_prev);
    }
  }

  BatchEval out{std::move(grads), {}, {}};
  out.indicator.mse = mse_sum / n;
  out.indicator.penalty = violated ? 1.0 : 0.0;
  out.indicator.total = out.indicator.mse + lambda * out.indicator.penalty;
  if (mode == PenaltyMode::indicator) {
    out.optimized = out.indicator;
  } else {
    out.optimized.mse = out.indicator.mse;
    out.optimized.penalty = hinge_sum / n;
    out.optimized.total = out.optimized.mse + lambda * out.optimized.penalty;
  }
  return out;
}

Gradients backward(const NetworkModel& model, std::span<const TrainingRecord> batch,
                   double lambda, PenaltyMode mode) {
  return backward_with_loss(model, batch, lambda, mode).grads;
}

OptimizerState OptimizerState::init(const NetworkModel& model, double learning_rate,
                                    double rho, double epsilon) {
  OptimizerState s;
  s.learning_rate = learning_rate;
  s.rho = rho;
  s.epsilon = epsilon;
  s.accum.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    s.accum[l].weights.assign(model.layers[l].weights.size(), 0.0);
    s.accum[l].biases.assign(model.layers[l].biases.size(), 0.0);
  }
  return s;
}

namespace {

void rmsprop_update(std::vector<double>& params, std::vector<double>& v,
                    const std::vector<double>& g, double rho, double eps, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    v[i] = rho * v[i] + (1.0 - rho) * g[i] * g[i];
    params[i] -= lr * g[i] / (std::sqrt(v[i]) + eps);
  }
}

}  // namespace

void rmsprop_step(OptimizerState& state, NetworkModel& model, const Gradients& grads) {
  if (state.accum.size() != model.layers.size() ||
      grads.layers.size() != model.layers.size()) {
    throw std::invalid_argument("rmsprop_step: shape mismatch");
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    rmsprop_update(model.layers[l].weights, state.accum[l].weights,
                   grads.layers[l].weights, state.rho, state.epsilon,
                   state.learning_rate);
    rmsprop_update(model.layers[l].biases, state.accum[l].biases,
                   grads.layers[l].biases, state.rho, state.epsilon,
                   state.learning_rate);
  }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "gevnet-model";
constexpr const char* kVersionTag = "v1";

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::linear:
      return "linear";
    case Activation::custom_output:
      return "custom_output";
  }
  return "linear";
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  if (s == "custom_output") return Activation::custom_output;
  throw ModelFormatError("unknown activation tag: " + s);
}

}  // namespace

std::string serialize_model(const NetworkModel& model) {
  json j;
  j["format"] = kFormatTag;
  j["version"] = kVersionTag;
  j["input_dim"] = model.input_dim();
  j["output_dim"] = model.output_dim();
  j["output_scales"] = {{"s_mu", model.output_scales.s_mu},
                        {"s_xi", model.output_scales.s_xi}};
  j["sigma_floor"] = model.sigma_floor;
  j["percentiles"] = model.pset.probs;
  j["standardization"] = "mean_iqr";
  j["metadata"] = {{"epochs_run", model.metadata.epochs_run},
                   {"best_epoch", model.metadata.best_epoch},
                   {"final_valid_loss", model.metadata.final_valid_loss},
                   {"training_seconds", model.metadata.training_seconds},
                   {"seed", model.metadata.seed},
                   {"scenario", model.metadata.scenario}};
  json layers = json::array();
  for (const auto& l : model.layers) {
    layers.push_back({{"in", l.in_dim},
                      {"out", l.out_dim},
                      {"activation", activation_name(l.activation)},
                      {"weights", l.weights},
                      {"biases", l.biases}});
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

NetworkModel deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("corrupt model payload: ") + e.what());
  }

  try {
    if (!j.contains("format") || j.at("format").get<std::string>() != kFormatTag) {
      throw ModelFormatError("not a gevnet model file");
    }
    if (!j.contains("version") || j.at("version").get<std::string>() != kVersionTag) {
      throw ModelVersionError("unsupported model version (expected v1)");
    }

    NetworkModel model;
    model.output_scales.s_mu = j.at("output_scales").at("s_mu").get<double>();
    model.output_scales.s_xi = j.at("output_scales").at("s_xi").get<double>();
    model.sigma_floor = j.at("sigma_floor").get<double>();
    const auto probs = j.at("percentiles").get<std::vector<double>>();
    if (probs.size() != kNumPercentiles) {
      throw ModelDimensionError("percentile set must have 11 entries");
    }
    std::copy(probs.begin(), probs.end(), model.pset.probs.begin());

    const json& md = j.at("metadata");
    model.metadata.epochs_run = md.at("epochs_run").get<int>();
    model.metadata.best_epoch = md.at("best_epoch").get<int>();
    model.metadata.final_valid_loss = md.at("final_valid_loss").get<double>();
    model.metadata.training_seconds = md.at("training_seconds").get<double>();
    model.metadata.seed = md.at("seed").get<std::uint64_t>();
    model.metadata.scenario = md.at("scenario").get<std::string>();

    for (const json& jl : j.at("layers")) {
      DenseLayer l;
      l.in_dim = jl.at("in").get<std::size_t>();
      l.out_dim = jl.at("out").get<std::size_t>();
      l.activation = activation_from(jl.at("activation").get<std::string>());
      l.weights = jl.at("weights").get<std::vector<double>>();
      l.biases = jl.at("biases").get<std::vector<double>>();
      if (l.in_dim == 0 || l.out_dim == 0 ||
          l.weights.size() != l.in_dim * l.out_dim || l.biases.size() != l.out_dim) {
        throw ModelDimensionError("layer dimensions inconsistent with payload");
      }
      if (!model.layers.empty() && model.layers.back().out_dim != l.in_dim) {
        throw ModelDimensionError("layer chain dimensions do not match");
      }
      model.layers.push_back(std::move(l));
    }
    if (model.layers.empty()) throw ModelDimensionError("model has no layers");
    const std::size_t in = j.at("input_dim").get<std::size_t>();
    const std::size_t out = j.at("output_dim").get<std::size_t>();
    if (in != model.input_dim() || out != model.output_dim()) {
      throw ModelDimensionError("declared dims disagree with layer stack");
    }
    return model;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model payload: ") + e.what());
  }
}

void save_model(const NetworkModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << serialize_model(model) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

NetworkModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace gevnet
