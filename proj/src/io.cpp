#include "barronforge/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace barronforge {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) throw std::invalid_argument("expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

double finite_number(const json& v, const char* what) {
  if (!v.is_number()) throw std::invalid_argument(std::string(what) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
  return x;
}

Eigen::VectorXd vector_of(const json& v, const char* what) {
  if (!v.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = finite_number(v[i], what);
  return out;
}

json array_of(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

SpectralTarget target_from_json(const json& doc) {
  const json& dim_field = field(doc, "dim");
  if (!dim_field.is_number_integer()) throw std::invalid_argument("dim must be an integer");
  const int dim = dim_field.get<int>();
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");

  const json& domain = field(doc, "domain");
  Box box{vector_of(field(domain, "lo"), "domain.lo"), vector_of(field(domain, "hi"), "domain.hi")};
  if (box.lo.size() != dim || box.hi.size() != dim) throw std::invalid_argument("domain bounds must have length dim");

  const json& modes_field = field(doc, "modes");
  if (!modes_field.is_array() || modes_field.empty()) throw std::invalid_argument("modes must be a nonempty array");
  std::vector<FourierMode> modes;
  for (const json& m : modes_field) {
    FourierMode mode;
    mode.frequency = vector_of(field(m, "xi"), "xi");
    mode.amplitude = finite_number(field(m, "amplitude"), "amplitude");
    mode.phase = finite_number(field(m, "phase"), "phase");
    modes.push_back(std::move(mode));
  }
  return SpectralTarget(dim, std::move(modes), std::move(box));
}

json target_to_json(const SpectralTarget& target) {
  json modes = json::array();
  for (const auto& m : target.modes()) {
    modes.push_back({{"xi", array_of(m.frequency)}, {"amplitude", m.amplitude}, {"phase", m.phase}});
  }
  return {{"dim", target.dim()},
          {"domain", {{"lo", array_of(target.domain().lo)}, {"hi", array_of(target.domain().hi)}}},
          {"modes", std::move(modes)}};
}

ReluNetwork network_from_json(const json& doc) {
  const json& in = field(doc, "input_dim");
  if (!in.is_number_integer()) throw std::invalid_argument("input_dim must be an integer");
  const json& layers_field = field(doc, "layers");
  if (!layers_field.is_array()) throw std::invalid_argument("layers must be an array");

  std::vector<Layer> layers;
  for (const json& l : layers_field) {
    Layer layer;
    const json& w = field(l, "w");
    if (!w.is_array() || w.empty()) throw std::invalid_argument("layer weight must be a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(w.size());
    const auto cols = static_cast<Eigen::Index>(w[0].is_array() ? w[0].size() : 0);
    layer.weight.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Eigen::VectorXd row = vector_of(w[static_cast<std::size_t>(i)], "weight row");
      if (row.size() != cols) throw std::invalid_argument("ragged weight matrix");
      layer.weight.row(i) = row.transpose();
    }
    layer.bias = vector_of(field(l, "b"), "bias");
    const json& act = field(l, "activation");
    if (act == "relu") {
      layer.activation = Activation::Relu;
    } else if (act == "none") {
      layer.activation = Activation::None;
    } else {
      throw std::invalid_argument("activation must be \"relu\" or \"none\"");
    }
    layers.push_back(std::move(layer));
  }
  return ReluNetwork(in.get<int>(), std::move(layers));
}

json network_to_json(const ReluNetwork& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) {
    json w = json::array();
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i) w.push_back(array_of(l.weight.row(i).transpose()));
    layers.push_back(
        {{"w", std::move(w)}, {"b", array_of(l.bias)}, {"activation", l.activation == Activation::Relu ? "relu" : "none"}});
  }
  return {{"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
}

json report_to_json(const BuildReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) samples.push_back({{"mode_index", s.mode_index}, {"r", s.r}});
  return {
      {"variant", variant_name(r.variant)},
      {"m", r.m},
      {"accepted", r.accepted},
      {"retries_used", r.retries_used},
      {"error_estimate", r.error_estimate},
      {"error_std_err", r.error_std_err},
      {"error_bound", r.error_bound},
      {"error_slack", r.error_slack},
      {"std_err_margin", r.std_err_margin},
      {"total_depth", r.total_depth},
      {"depth_bound", r.depth_bound},
      {"merged_depth", r.merged_depth},
      {"merged_hidden_layers", r.merged_hidden_layers},
      {"merged_width", r.merged_width},
      {"merged_depth_bound", r.merged_depth_bound},
      {"domain_volume", r.domain_volume},
      {"norm_b0", r.norm_b0},
      {"norm_b1", r.norm_b1},
      {"norm_blog", r.norm_blog},
      {"norm_b1log", r.norm_b1log},
      {"c_factor", r.c_factor},
      {"rescale", {{"c", r.rescale.c}, {"shift", array_of(r.rescale.shift)}}},
      {"quadrature",
       {{"kind", quadrature_kind_name(r.quad.kind)}, {"n_points", r.quad.n_points}, {"seed", r.quad.seed}}},
      {"seed", r.seed},
      {"samples", std::move(samples)},
  };
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

}  // namespace barronforge
