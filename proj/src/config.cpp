#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "specnet/data_io.hpp"
#include "specnet/error.hpp"
#include "text_util.hpp"

namespace specnet {

namespace {

[[noreturn]] void type_error(std::string_view key, std::string_view value, const char* expected) {
  throw Error(Errc::TypeError, "key '" + std::string(key) + "': '" + std::string(value) +
                                   "' is not " + expected);
}

std::size_t as_count(std::string_view key, std::string_view v) {
  const auto i = detail::parse_int(v);
  if (!i || *i < 1) type_error(key, v, "a positive integer");
  return static_cast<std::size_t>(*i);
}

int as_nonneg_int(std::string_view key, std::string_view v) {
  const auto i = detail::parse_int(v);
  if (!i || *i < 0 || *i > 1'000'000) type_error(key, v, "a nonnegative integer");
  return static_cast<int>(*i);
}

double as_positive(std::string_view key, std::string_view v) {
  const auto d = detail::parse_double(v);
  if (!d || !(*d > 0.0) || !std::isfinite(*d)) type_error(key, v, "a positive number");
  return *d;
}

double as_fraction(std::string_view key, std::string_view v, bool allow_one) {
  const auto d = detail::parse_double(v);
  if (!d || !(*d >= 0.0) || (allow_one ? *d > 1.0 : *d >= 1.0))
    type_error(key, v, allow_one ? "a number in [0,1]" : "a number in [0,1)");
  return *d;
}

double as_decay(std::string_view key, std::string_view v) {
  const auto d = detail::parse_double(v);
  if (!d || !(*d > 0.0 && *d < 1.0)) type_error(key, v, "a number in (0,1)");
  return *d;
}

bool as_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  type_error(key, v, "a boolean");
}

std::vector<LayerSpec> as_layers(std::string_view key, std::string_view v) {
  try {
    return parse_layers(v);
  } catch (const Error&) {
    type_error(key, v, "a layer list like relu:64,relu:64");
  }
}

template <class E, std::size_t N>
E as_enum(std::string_view key, std::string_view v,
          const std::pair<std::string_view, E> (&names)[N]) {
  for (const auto& [name, e] : names)
    if (name == v) return e;
  std::string expected = "one of";
  for (const auto& [name, e] : names) expected += " " + std::string(name);
  type_error(key, v, expected.c_str());
}

constexpr std::pair<std::string_view, LossVariant> kVariants[] = {
    {"unnormalized", LossVariant::unnormalized}, {"normalized", LossVariant::normalized}};
constexpr std::pair<std::string_view, LossScaling> kScalings[] = {
    {"inverse_m", LossScaling::inverse_m}, {"inverse_m_squared", LossScaling::inverse_m_squared}};
constexpr std::pair<std::string_view, ScaleMode> kScaleModes[] = {
    {"per_point_median_nn", ScaleMode::per_point_median_nn},
    {"global_median_kth", ScaleMode::global_median_kth},
    {"fixed", ScaleMode::fixed}};

template <class E, std::size_t N>
std::string_view enum_name(E e, const std::pair<std::string_view, E> (&names)[N]) {
  for (const auto& [name, v] : names)
    if (v == e) return name;
  return "?";
}

using Setter = std::function<void(TrainConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"k", [](TrainConfig& c, auto k, auto v) { c.spectral.k = as_count(k, v); }},
      {"batch_size", [](TrainConfig& c, auto k, auto v) { c.spectral.batch_size = as_count(k, v); }},
      {"ortho_batch_size",
       [](TrainConfig& c, auto k, auto v) { c.spectral.ortho_batch_size = as_count(k, v); }},
      {"loss_variant",
       [](TrainConfig& c, auto k, auto v) { c.spectral.loss_variant = as_enum(k, v, kVariants); }},
      {"loss_scaling",
       [](TrainConfig& c, auto k, auto v) { c.spectral.loss_scaling = as_enum(k, v, kScalings); }},
      {"hidden", [](TrainConfig& c, auto k, auto v) { c.spectral.hidden = as_layers(k, v); }},
      {"lr", [](TrainConfig& c, auto k, auto v) { c.spectral.lr = as_positive(k, v); }},
      {"lr_decay", [](TrainConfig& c, auto k, auto v) { c.spectral.lr_decay = as_decay(k, v); }},
      {"patience", [](TrainConfig& c, auto k, auto v) { c.spectral.patience = as_nonneg_int(k, v); }},
      {"lr_floor", [](TrainConfig& c, auto k, auto v) { c.spectral.lr_floor = as_positive(k, v); }},
      {"max_epochs", [](TrainConfig& c, auto k, auto v) { c.spectral.max_epochs = as_count(k, v); }},
      {"batches_per_epoch",
       [](TrainConfig& c, auto k, auto v) {
         const auto i = detail::parse_int(v);
         if (!i || *i < 0) type_error(k, v, "a nonnegative integer");
         c.spectral.batches_per_epoch = static_cast<std::size_t>(*i);
       }},
      {"val_fraction",
       [](TrainConfig& c, auto k, auto v) { c.spectral.val_fraction = as_fraction(k, v, false); }},
      {"n_neighbors",
       [](TrainConfig& c, auto k, auto v) { c.spectral.affinity.n_neighbors = as_count(k, v); }},
      {"scale_mode",
       [](TrainConfig& c, auto k, auto v) {
         c.spectral.affinity.scale_mode = as_enum(k, v, kScaleModes);
       }},
      {"scale_k", [](TrainConfig& c, auto k, auto v) { c.spectral.affinity.scale_k = as_count(k, v); }},
      {"sigma",
       [](TrainConfig& c, auto k, auto v) { c.spectral.affinity.fixed_sigma = as_positive(k, v); }},
      {"use_siamese", [](TrainConfig& c, auto k, auto v) { c.use_siamese = as_bool(k, v); }},
      {"siamese_n_pos",
       [](TrainConfig& c, auto k, auto v) { c.siamese.n_pos_neighbors = as_count(k, v); }},
      {"siamese_sample_one",
       [](TrainConfig& c, auto k, auto v) { c.siamese.sample_one_neighbor = as_bool(k, v); }},
      {"siamese_margin", [](TrainConfig& c, auto k, auto v) { c.siamese.margin = as_positive(k, v); }},
      {"siamese_layers", [](TrainConfig& c, auto k, auto v) { c.siamese.layers = as_layers(k, v); }},
      {"siamese_batch_size",
       [](TrainConfig& c, auto k, auto v) { c.siamese.batch_size = as_count(k, v); }},
      {"siamese_lr", [](TrainConfig& c, auto k, auto v) { c.siamese.lr = as_positive(k, v); }},
      {"siamese_lr_decay",
       [](TrainConfig& c, auto k, auto v) { c.siamese.lr_decay = as_decay(k, v); }},
      {"siamese_patience",
       [](TrainConfig& c, auto k, auto v) { c.siamese.patience = as_nonneg_int(k, v); }},
      {"siamese_lr_floor",
       [](TrainConfig& c, auto k, auto v) { c.siamese.lr_floor = as_positive(k, v); }},
      {"siamese_max_epochs",
       [](TrainConfig& c, auto k, auto v) { c.siamese.max_epochs = as_count(k, v); }},
      {"siamese_val_fraction",
       [](TrainConfig& c, auto k, auto v) { c.siamese.val_fraction = as_fraction(k, v, false); }},
      {"kmeans_restarts", [](TrainConfig& c, auto k, auto v) { c.kmeans.restarts = as_count(k, v); }},
      {"kmeans_max_iterations",
       [](TrainConfig& c, auto k, auto v) { c.kmeans.max_iterations = as_count(k, v); }},
      {"labels_frac", [](TrainConfig& c, auto k, auto v) { c.labels_frac = as_fraction(k, v, true); }},
      {"seed",
       [](TrainConfig& c, auto k, auto v) {
         const auto i = detail::parse_int(v);
         if (!i || *i < 0) type_error(k, v, "a nonnegative integer");
         c.seed = static_cast<std::uint64_t>(*i);
       }},
  };
  return table;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

void apply_config_value(TrainConfig& cfg, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw Error(Errc::UnknownKey, "unknown key '" + std::string(key) + "'");
  it->second(cfg, key, detail::trim(value));
}

TrainConfig parse_config(std::istream& in) {
  TrainConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    auto sep = text.find('=');
    if (sep == std::string_view::npos) sep = text.find(':');
    if (sep == std::string_view::npos)
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_config_value(cfg, detail::trim(text.substr(0, sep)), text.substr(sep + 1));
    } catch (const Error& e) {
      std::string msg = e.what();
      msg = msg.substr(msg.find(": ") + 2);
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + msg);
    }
  }
  cfg.spectral.affinity.validate();
  cfg.siamese.validate();
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "' for reading");
  return parse_config(in);
}

std::string format_config(const TrainConfig& c) {
  const SpectralConfig& s = c.spectral;
  const SiameseConfig& m = c.siamese;
  std::ostringstream o;
  o << "k = " << s.k << '\n'
    << "batch_size = " << s.batch_size << '\n'
    << "ortho_batch_size = " << s.ortho_batch_size << '\n'
    << "loss_variant = " << enum_name(s.loss_variant, kVariants) << '\n'
    << "loss_scaling = " << enum_name(s.loss_scaling, kScalings) << '\n'
    << "hidden = " << format_layers(s.hidden) << '\n'
    << "lr = " << num(s.lr) << '\n'
    << "lr_decay = " << num(s.lr_decay) << '\n'
    << "patience = " << s.patience << '\n'
    << "lr_floor = " << num(s.lr_floor) << '\n'
    << "max_epochs = " << s.max_epochs << '\n'
    << "batches_per_epoch = " << s.batches_per_epoch << '\n'
    << "val_fraction = " << num(s.val_fraction) << '\n'
    << "n_neighbors = " << s.affinity.n_neighbors << '\n'
    << "scale_mode = " << enum_name(s.affinity.scale_mode, kScaleModes) << '\n'
    << "scale_k = " << s.affinity.scale_k << '\n';
  if (s.affinity.fixed_sigma) o << "sigma = " << num(*s.affinity.fixed_sigma) << '\n';
  o << "use_siamese = " << (c.use_siamese ? "true" : "false") << '\n'
    << "siamese_n_pos = " << m.n_pos_neighbors << '\n'
    << "siamese_sample_one = " << (m.sample_one_neighbor ? "true" : "false") << '\n'
    << "siamese_margin = " << num(m.margin) << '\n';
  if (!m.layers.empty()) o << "siamese_layers = " << format_layers(m.layers) << '\n';
  o << "siamese_batch_size = " << m.batch_size << '\n'
    << "siamese_lr = " << num(m.lr) << '\n'
    << "siamese_lr_decay = " << num(m.lr_decay) << '\n'
    << "siamese_patience = " << m.patience << '\n'
    << "siamese_lr_floor = " << num(m.lr_floor) << '\n'
    << "siamese_max_epochs = " << m.max_epochs << '\n'
    << "siamese_val_fraction = " << num(m.val_fraction) << '\n'
    << "kmeans_restarts = " << c.kmeans.restarts << '\n'
    << "kmeans_max_iterations = " << c.kmeans.max_iterations << '\n'
    << "labels_frac = " << num(c.labels_frac) << '\n'
    << "seed = " << c.seed << '\n';
  return o.str();
}

}  // namespace specnet
