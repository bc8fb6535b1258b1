#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specnet/matrix.hpp"

namespace specnet {

enum class Activation { relu, tanh, linear };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

struct LayerSpec {
  std::size_t width = 1;
  Activation activation = Activation::relu;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Parses "relu:64,relu:64,tanh:2" (activation:width, comma separated).
std::vector<LayerSpec> parse_layers(std::string_view text);
std::string format_layers(std::span<const LayerSpec> layers);

/// y = act(x·weight + bias); weight is fan_in × width.
struct DenseLayer {
  Matrix weight;
  std::vector<double> bias;
  Activation activation = Activation::relu;
};

struct ForwardCache {
  /// inputs[l] is the input of layer l; outputs[l] its post-activation value.
  std::vector<Matrix> inputs;
  std::vector<Matrix> outputs;
  /// Final output (after the frozen map when one is installed).
  Matrix result;
};

struct Gradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
};

/// Dense feed-forward network. The optional frozen output map is a k×k
/// linear transform applied after the last layer; it takes part in the
/// forward pass and the chain rule but is never trained by backprop.
class Mlp {
 public:
  Mlp() = default;
  /// Glorot-uniform weights, zero biases.
  Mlp(std::size_t input_dim, std::vector<LayerSpec> specs, std::mt19937_64& rng);
  Mlp(std::size_t input_dim, std::vector<DenseLayer> layers);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept;
  std::vector<LayerSpec> specs() const;

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  const std::optional<Matrix>& frozen_output() const noexcept { return frozen_; }
  void set_frozen_output(Matrix f);
  void clear_frozen_output() noexcept { frozen_.reset(); }

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, ForwardCache& cache) const;
  /// Output of the last trainable layer, before the frozen map.
  Matrix forward_pre_output(const Matrix& x) const;

  Gradients backward(const ForwardCache& cache, const Matrix& output_grad) const;
  /// Backprop starting from a gradient on the last trainable layer's output,
  /// skipping the frozen map.
  Gradients backward_pre_output(const ForwardCache& cache, const Matrix& pre_grad) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Mlp&, const Mlp&);

 private:
  Gradients backward_from(const ForwardCache& cache, Matrix delta) const;

  std::size_t input_dim_ = 0;
  std::vector<DenseLayer> layers_;
  std::optional<Matrix> frozen_;
};

struct RmspropState {
  double decay = 0.9;
  double epsilon = 1e-8;
  std::vector<Matrix> weight_acc;
  std::vector<std::vector<double>> bias_acc;

  static RmspropState for_model(const Mlp& model, double decay = 0.9, double epsilon = 1e-8);
};

/// acc ← ρ·acc + (1−ρ)·g²;  w ← w − lr·g/√(acc+ε).
void rmsprop_step(Mlp& model, const Gradients& grads, RmspropState& state, double lr);

struct LrSchedule {
  double lr = 1e-3;
  double decay_factor = 0.1;
  int patience = 10;
  double floor = 1e-8;
  double best = 0.0;
  bool has_best = false;
  int wait = 0;
};

struct ScheduleUpdate {
  LrSchedule schedule;
  bool decayed = false;
  bool stop = false;
};

/// Consumes the newest entry of the validation history. After `patience`
/// consecutive entries without improving on the best value, the rate is
/// multiplied by decay_factor; stop is raised once the rate reaches floor.
ScheduleUpdate schedule_update(const LrSchedule& sched, std::span<const double> history);

void save_mlp(std::ostream& out, const Mlp& model);
Mlp load_mlp(std::istream& in);
void save_mlp(const std::string& path, const Mlp& model);
Mlp load_mlp(const std::string& path);

}  // namespace specnet
