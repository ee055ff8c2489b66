#include "cnf/model_io.hpp"

#include <cmath>
#include <fstream>
#include <span>

#include "cnf/error.hpp"

namespace cnf {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "cnf-model";

json vector_to_json(std::span<const double> values) {
  json a = json::array();
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::FormatError, "cannot save a non-finite parameter");
    a.push_back(v);
  }
  return a;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json({m.row(r), m.cols()}));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

std::vector<double> vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::FormatError, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::FormatError, "expected a number");
    out.push_back(v.get<double>());
  }
  return out;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const json& data = j.at("data");
  if (!data.is_array() || data.size() != rows) throw Error(ErrorCode::ShapeMismatch, "matrix row count mismatch");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::vector<double> row = vector_from_json(data[r]);
    if (row.size() != cols) throw Error(ErrorCode::ShapeMismatch, "matrix column count mismatch");
    std::copy(row.begin(), row.end(), m.row(r));
  }
  return m;
}

json params_to_json(const Params& p) {
  json blocks = json::array();
  for (const BlockParams& b : p.blocks) blocks.push_back({{"kernel", matrix_to_json(b.kernel)}, {"hash", matrix_to_json(b.hash)}});
  return {{"input_hash", matrix_to_json(p.input_hash)},
          {"blocks", blocks},
          {"hidden_weight", matrix_to_json(p.hidden_weight)},
          {"hidden_bias", vector_to_json(p.hidden_bias)},
          {"output_weight", vector_to_json(p.output_weight)},
          {"output_bias", vector_to_json(p.output_bias)},
          {"target_shift", p.target_shift},
          {"target_scale", p.target_scale},
          {"vocab_size", p.vocab_size}};
}

Params params_from_json(const json& j) {
  Params p;
  p.input_hash = matrix_from_json(j.at("input_hash"));
  for (const json& b : j.at("blocks")) p.blocks.push_back({matrix_from_json(b.at("kernel")), matrix_from_json(b.at("hash"))});
  p.hidden_weight = matrix_from_json(j.at("hidden_weight"));
  p.hidden_bias = vector_from_json(j.at("hidden_bias"));
  p.output_weight = vector_from_json(j.at("output_weight"));
  p.output_bias = vector_from_json(j.at("output_bias"));
  p.target_shift = j.at("target_shift").get<double>();
  p.target_scale = j.at("target_scale").get<double>();
  p.vocab_size = j.at("vocab_size").get<std::size_t>();
  return p;
}

}  // namespace

json config_to_json(const ModelConfig& c) {
  return {{"arch", to_string(c.arch)},
          {"depth", c.depth},
          {"kernel_widths", c.kernel_widths},
          {"filters", c.filters},
          {"embed_dim", c.embed_dim},
          {"head_hidden", c.head_hidden},
          {"task", to_string(c.task)},
          {"activation", to_string(c.activation)},
          {"seed", c.seed},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.arch = parse_architecture(j.at("arch").get<std::string>());
  c.depth = j.at("depth").get<std::size_t>();
  c.kernel_widths = j.at("kernel_widths").get<std::vector<std::size_t>>();
  c.filters = j.at("filters").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.head_hidden = j.at("head_hidden").get<std::size_t>();
  c.task = parse_task(j.at("task").get<std::string>());
  c.activation = parse_activation(j.at("activation").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.validate();
  return c;
}

json model_to_json(const Model& model) {
  return {{"format", kFormatName},
          {"version", kModelFormatVersion},
          {"config", config_to_json(model.config)},
          {"max_len", model.max_len},
          {"vocab", model.vocab.to_json()},
          {"params", params_to_json(model.params)}};
}

Model model_from_json(const json& j) {
  try {
    if (j.value("format", "") != kFormatName) throw Error(ErrorCode::FormatError, "not a model file");
    if (j.value("version", 0) != kModelFormatVersion)
      throw Error(ErrorCode::FormatError, "unsupported model version " + j.value("version", json()).dump());
    Model m;
    m.config = config_from_json(j.at("config"));
    m.max_len = j.at("max_len").get<std::size_t>();
    m.vocab = Vocab::from_json(j.at("vocab"));
    m.params = params_from_json(j.at("params"));
    if (m.params.vocab_size != m.vocab.size())
      throw Error(ErrorCode::ShapeMismatch, "parameters do not match the vocabulary size");
    check_shapes(m.params, m.config, m.vocab.size());
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::string text = model_to_json(model).dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace cnf
