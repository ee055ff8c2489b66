#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "cnf/featurize.hpp"
#include "cnf/model.hpp"

namespace cnf {

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to predict from SMILES text.
struct Model {
  ModelConfig config;
  Vocab vocab;
  Params params;
  std::size_t max_len = kDefaultMaxLen;

  friend bool operator==(const Model&, const Model&) = default;
};

nlohmann::json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j);

/// Doubles are written with enough digits to read back bit-identically.
/// Throws Error(FormatError) for non-finite parameters.
nlohmann::json model_to_json(const Model& model);
/// Throws Error(FormatError) or Error(ShapeMismatch) on a malformed document.
Model model_from_json(const nlohmann::json& j);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace cnf
