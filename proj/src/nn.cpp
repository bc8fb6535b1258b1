#include "specnet/nn.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "specnet/error.hpp"
#include "text_util.hpp"

namespace specnet {

std::string_view activation_name(Activation a) noexcept {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "linear";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  throw Error(Errc::ParseError, "unknown activation '" + std::string(name) + "'");
}

std::vector<LayerSpec> parse_layers(std::string_view text) {
  std::vector<LayerSpec> out;
  for (std::string_view item : detail::split(text, ',')) {
    item = detail::trim(item);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw Error(Errc::ParseError, "layer '" + std::string(item) + "' is not activation:width");
    LayerSpec spec;
    spec.activation = parse_activation(detail::trim(item.substr(0, colon)));
    const auto width = detail::parse_int(detail::trim(item.substr(colon + 1)));
    if (!width || *width < 1)
      throw Error(Errc::ParseError, "layer width must be a positive integer in '" +
                                        std::string(item) + "'");
    spec.width = static_cast<std::size_t>(*width);
    out.push_back(spec);
  }
  if (out.empty()) throw Error(Errc::ParseError, "empty layer list");
  return out;
}

std::string format_layers(std::span<const LayerSpec> layers) {
  std::string s;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) s += ',';
    s += activation_name(layers[i].activation);
    s += ':';
    s += std::to_string(layers[i].width);
  }
  return s;
}

Mlp::Mlp(std::size_t input_dim, std::vector<LayerSpec> specs, std::mt19937_64& rng)
    : input_dim_(input_dim) {
  if (input_dim == 0) throw Error(Errc::InvalidArgument, "input dimension must be positive");
  std::size_t fan_in = input_dim;
  for (const LayerSpec& s : specs) {
    if (s.width < 1) throw Error(Errc::InvalidArgument, "layer width must be >= 1");
    DenseLayer layer{Matrix(fan_in, s.width), std::vector<double>(s.width, 0.0), s.activation};
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + s.width));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& w : layer.weight.data()) w = u(rng);
    layers_.push_back(std::move(layer));
    fan_in = s.width;
  }
}

Mlp::Mlp(std::size_t input_dim, std::vector<DenseLayer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  std::size_t fan_in = input_dim;
  for (const DenseLayer& l : layers_) {
    if (l.weight.rows() != fan_in || l.bias.size() != l.weight.cols())
      throw Error(Errc::DimensionMismatch, "layer shapes are not consecutive");
    fan_in = l.weight.cols();
  }
}

std::size_t Mlp::output_dim() const noexcept {
  return layers_.empty() ? input_dim_ : layers_.back().weight.cols();
}

std::vector<LayerSpec> Mlp::specs() const {
  std::vector<LayerSpec> s;
  for (const DenseLayer& l : layers_) s.push_back({l.weight.cols(), l.activation});
  return s;
}

void Mlp::set_frozen_output(Matrix f) {
  const std::size_t k = output_dim();
  if (f.rows() != k || f.cols() != k)
    throw Error(Errc::DimensionMismatch, "frozen output map must be k x k");
  frozen_ = std::move(f);
}

namespace {

void apply_activation(Matrix& z, Activation a) {
  switch (a) {
    case Activation::relu:
      for (double& v : z.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::tanh:
      for (double& v : z.data()) v = std::tanh(v);
      break;
    case Activation::linear:
      break;
  }
}

Matrix dense(const Matrix& x, const DenseLayer& l) {
  Matrix z = matmul(x, l.weight);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += l.bias[c];
  }
  apply_activation(z, l.activation);
  return z;
}

}  // namespace

Matrix Mlp::forward_pre_output(const Matrix& x) const {
  if (x.cols() != input_dim_)
    throw Error(Errc::DimensionMismatch, "input has " + std::to_string(x.cols()) +
                                             " columns, network expects " +
                                             std::to_string(input_dim_));
  Matrix h = x;
  for (const DenseLayer& l : layers_) h = dense(h, l);
  return h;
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = forward_pre_output(x);
  if (frozen_) h = matmul(h, *frozen_);
  return h;
}

Matrix Mlp::forward(const Matrix& x, ForwardCache& cache) const {
  if (x.cols() != input_dim_)
    throw Error(Errc::DimensionMismatch, "input has " + std::to_string(x.cols()) +
                                             " columns, network expects " +
                                             std::to_string(input_dim_));
  cache.inputs.clear();
  cache.outputs.clear();
  Matrix h = x;
  for (const DenseLayer& l : layers_) {
    cache.inputs.push_back(h);
    h = dense(h, l);
    cache.outputs.push_back(h);
  }
  cache.result = frozen_ ? matmul(h, *frozen_) : h;
  return cache.result;
}

Gradients Mlp::backward(const ForwardCache& cache, const Matrix& output_grad) const {
  if (cache.outputs.size() != layers_.size())
    throw Error(Errc::DimensionMismatch, "cache does not match this network");
  if (output_grad.rows() != cache.result.rows() || output_grad.cols() != output_dim())
    throw Error(Errc::DimensionMismatch, "output gradient shape mismatch");
  return backward_from(cache, frozen_ ? matmul_nt(output_grad, *frozen_) : output_grad);
}

Gradients Mlp::backward_pre_output(const ForwardCache& cache, const Matrix& pre_grad) const {
  if (cache.outputs.size() != layers_.size())
    throw Error(Errc::DimensionMismatch, "cache does not match this network");
  if (pre_grad.rows() != cache.result.rows() || pre_grad.cols() != layers_.back().bias.size())
    throw Error(Errc::DimensionMismatch, "pre-output gradient shape mismatch");
  return backward_from(cache, pre_grad);
}

Gradients Mlp::backward_from(const ForwardCache& cache, Matrix delta) const {
  Gradients g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());

  for (std::size_t li = layers_.size(); li-- > 0;) {
    const DenseLayer& l = layers_[li];
    const Matrix& out = cache.outputs[li];
    auto dd = delta.data();
    auto od = out.data();
    switch (l.activation) {
      case Activation::relu:
        for (std::size_t i = 0; i < dd.size(); ++i)
          if (od[i] <= 0.0) dd[i] = 0.0;
        break;
      case Activation::tanh:
        for (std::size_t i = 0; i < dd.size(); ++i) dd[i] *= 1.0 - od[i] * od[i];
        break;
      case Activation::linear:
        break;
    }
    g.weight[li] = matmul_tn(cache.inputs[li], delta);
    std::vector<double> bias(l.bias.size(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) bias[c] += row[c];
    }
    g.bias[li] = std::move(bias);
    if (li > 0) delta = matmul_nt(delta, l.weight);
  }
  return g;
}

bool Mlp::all_finite() const noexcept {
  for (const DenseLayer& l : layers_) {
    if (!l.weight.all_finite()) return false;
    for (double b : l.bias)
      if (!std::isfinite(b)) return false;
  }
  return !frozen_ || frozen_->all_finite();
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.input_dim_ != b.input_dim_ || a.layers_.size() != b.layers_.size() ||
      a.frozen_ != b.frozen_)
    return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const DenseLayer& x = a.layers_[i];
    const DenseLayer& y = b.layers_[i];
    if (x.activation != y.activation || x.weight != y.weight || x.bias != y.bias) return false;
  }
  return true;
}

RmspropState RmspropState::for_model(const Mlp& model, double decay, double epsilon) {
  RmspropState s;
  s.decay = decay;
  s.epsilon = epsilon;
  for (const DenseLayer& l : model.layers()) {
    s.weight_acc.emplace_back(l.weight.rows(), l.weight.cols());
    s.bias_acc.emplace_back(l.bias.size(), 0.0);
  }
  return s;
}

void rmsprop_step(Mlp& model, const Gradients& grads, RmspropState& state, double lr) {
  auto& layers = model.layers();
  if (grads.weight.size() != layers.size() || state.weight_acc.size() != layers.size())
    throw Error(Errc::DimensionMismatch, "rmsprop_step: layer count mismatch");
  const double rho = state.decay;
  const double eps = state.epsilon;
  auto update = [&](std::span<double> w, std::span<const double> g, std::span<double> acc) {
    if (w.size() != g.size() || w.size() != acc.size())
      throw Error(Errc::DimensionMismatch, "rmsprop_step: parameter shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc[i] = rho * acc[i] + (1.0 - rho) * g[i] * g[i];
      if (g[i] != 0.0) w[i] -= lr * g[i] / std::sqrt(acc[i] + eps);
    }
  };
  for (std::size_t li = 0; li < layers.size(); ++li) {
    update(layers[li].weight.data(), grads.weight[li].data(), state.weight_acc[li].data());
    update(layers[li].bias, grads.bias[li], state.bias_acc[li]);
  }
}

ScheduleUpdate schedule_update(const LrSchedule& sched, std::span<const double> history) {
  if (history.empty()) throw Error(Errc::InvalidArgument, "schedule_update: empty history");
  ScheduleUpdate u{sched, false, false};
  LrSchedule& s = u.schedule;
  const double latest = history.back();
  if (!s.has_best || latest < s.best) {
    s.best = latest;
    s.has_best = true;
    s.wait = 0;
  } else if (++s.wait >= s.patience) {
    s.lr *= s.decay_factor;
    s.wait = 0;
    u.decayed = true;
  }
  u.stop = s.lr <= s.floor * (1.0 + 1e-9);
  return u;
}

// Text format, version 1:
//   specnet-mlp 1 input=<d> layers=<act:width,...> frozen=<0|1>
//   per layer: one line per weight row, then one line of biases
//   if frozen: one line per row of the k×k map
// Numbers use 17 significant digits so values round-trip exactly.

namespace {

void write_row(std::ostream& out, std::span<const double> row) {
  char buf[40];
  for (std::size_t i = 0; i < row.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", row[i]);
    if (i) out << ' ';
    out << buf;
  }
  out << '\n';
}

std::vector<double> read_row(std::istream& in, std::size_t expected, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(Errc::ParseError, "model file truncated at line " + std::to_string(line_no + 1));
  ++line_no;
  std::vector<double> row;
  for (std::string_view tok : detail::split_ws(line)) {
    const auto v = detail::parse_double(tok);
    if (!v)
      throw Error(Errc::ParseError, "bad number '" + std::string(tok) + "' at line " +
                                        std::to_string(line_no));
    row.push_back(*v);
  }
  if (row.size() != expected)
    throw Error(Errc::ParseError, "expected " + std::to_string(expected) + " values at line " +
                                      std::to_string(line_no));
  return row;
}

}  // namespace

void save_mlp(std::ostream& out, const Mlp& model) {
  const auto specs = model.specs();
  out << "specnet-mlp 1 input=" << model.input_dim() << " layers=" << format_layers(specs)
      << " frozen=" << (model.frozen_output() ? 1 : 0) << '\n';
  for (const DenseLayer& l : model.layers()) {
    for (std::size_t r = 0; r < l.weight.rows(); ++r) write_row(out, l.weight.row(r));
    write_row(out, l.bias);
  }
  if (const auto& f = model.frozen_output())
    for (std::size_t r = 0; r < f->rows(); ++r) write_row(out, f->row(r));
}

Mlp load_mlp(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error(Errc::ParseError, "empty model file");
  std::size_t line_no = 1;
  const auto fields = detail::split_ws(header);
  if (fields.size() != 5 || fields[0] != "specnet-mlp")
    throw Error(Errc::ParseError, "line 1: not a specnet-mlp header");
  if (fields[1] != "1")
    throw Error(Errc::ParseError, "line 1: unsupported model version " + std::string(fields[1]));
  auto value_of = [&](std::string_view field, std::string_view key) {
    if (!field.starts_with(key) || field.size() <= key.size() || field[key.size()] != '=')
      throw Error(Errc::ParseError, "line 1: expected " + std::string(key) + "=...");
    return field.substr(key.size() + 1);
  };
  const auto input = detail::parse_int(value_of(fields[2], "input"));
  if (!input || *input < 1) throw Error(Errc::ParseError, "line 1: bad input dimension");
  const auto specs = parse_layers(value_of(fields[3], "layers"));
  const auto frozen = value_of(fields[4], "frozen");
  if (frozen != "0" && frozen != "1") throw Error(Errc::ParseError, "line 1: bad frozen flag");

  std::vector<DenseLayer> layers;
  std::size_t fan_in = static_cast<std::size_t>(*input);
  for (const LayerSpec& s : specs) {
    DenseLayer l{Matrix(fan_in, s.width), {}, s.activation};
    for (std::size_t r = 0; r < fan_in; ++r) {
      const auto row = read_row(in, s.width, line_no);
      std::copy(row.begin(), row.end(), l.weight.row(r).begin());
    }
    l.bias = read_row(in, s.width, line_no);
    layers.push_back(std::move(l));
    fan_in = s.width;
  }
  Mlp model(static_cast<std::size_t>(*input), std::move(layers));
  if (frozen == "1") {
    const std::size_t k = model.output_dim();
    Matrix f(k, k);
    for (std::size_t r = 0; r < k; ++r) {
      const auto row = read_row(in, k, line_no);
      std::copy(row.begin(), row.end(), f.row(r).begin());
    }
    model.set_frozen_output(std::move(f));
  }
  return model;
}

void save_mlp(const std::string& path, const Mlp& model) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  save_mlp(out, model);
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  return load_mlp(in);
}

}  // namespace specnet
