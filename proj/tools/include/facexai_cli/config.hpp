#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facexai/attribution.hpp"
#include "facexai/dataset.hpp"
#include "facexai/eaoc.hpp"
#include "facexai/evaluation.hpp"
#include "facexai/explanation.hpp"
#include "facexai/image.hpp"
#include "facexai/kernel_shap.hpp"
#include "facexai/llm_client.hpp"
#include "facexai/onnx_embedder.hpp"
#include "facexai/prompt.hpp"

namespace facexai::cli {

namespace fs = std::filesystem;

struct ModelConfig {
  std::string kind = "synthetic";  // synthetic | onnx
  bool cache = true;
  // synthetic
  std::vector<double> weights;  // empty: s, s-1, ..., 1
  int dim = 64;
  std::uint64_t seed = 0;
  double offset_scale = 1.0;
  int activation_channels = 8;
  int activation_grid = 4;
  int activation_families = 2;
  // onnx
  OnnxEmbedderConfig onnx;
};

struct DataConfig {
  std::string set = "set0";  // built-in id or resolved path
  bool synthetic = false;
  SyntheticDatasetConfig synthetic_config;
  std::uint64_t calibration_seed = 1;  // synthetic calibration split
  fs::path calibration;        // image manifest for concept extraction
  fs::path calibration_pairs;  // pair manifest over the calibration images
  fs::path images;             // image manifest for explanation and evaluation
  fs::path pairs;              // pair manifest over `images`
};

struct ConceptsConfig {
  std::vector<Method> methods{Method::kEaoc};
  Representation representation = Representation::kEmbedding;
  int groups = 0;  // MAGE K; 0 disables grouping
  int lime_samples = 1000;
  double lime_kernel_width = 0.25;
  double lime_ridge = 1e-3;
  NormKind lime_target = NormKind::kL1;
  ShapMode shap_mode = ShapMode::kAuto;
  int shap_samples = 0;
  std::string shap_value_fn = "single";  // single | pair
  NormKind shap_target = NormKind::kL1;
};

struct ExplainSection {
  std::string ranking = "uniform";  // "uniform" or a ranking JSON path
  int top_k = 10;
  AreaWeighting area_weighting = AreaWeighting::kRelativeArea;
  std::string pair;     // pair id from the pair manifest
  std::string image_a;  // or two image ids
  std::string image_b;
};

struct EvaluateSection {
  CurveTarget target = CurveTarget::kRepresentation;
  int trials = 20;
  std::vector<fs::path> rankings;
  bool oracle = false;  // add the planted order (synthetic model only)
};

struct LlmSection {
  bool enabled = false;
  LlmEndpoint endpoint;
  LlmMode mode = LlmMode::kLive;
  fs::path fixtures;
  fs::path log;
};

struct PromptSection {
  PromptToggles toggles;
  fs::path template_path;
};

struct RunConfig {
  fs::path output = "out";
  std::uint64_t seed = 0;
  int jobs = 0;  // 0: available parallelism
  FillStrategy fill = FillStrategy::mid_gray();
  std::string timestamp;  // resolved at first run
  ModelConfig model;
  DataConfig data;
  ConceptsConfig concepts;
  ExplainSection explain;
  EvaluateSection evaluate;
  LlmSection llm;
  PromptSection prompt;
};

// Collected configuration problems; thrown as one ValidationError.
std::vector<std::string> parse_config(const nlohmann::json& doc, const fs::path& base_dir,
                                      RunConfig& out);

// TOML (.toml) or JSON; a run.json written by a previous run is accepted and
// its "config" object used. Relative paths resolve against the file's
// directory. Throws ValidationError listing every problem.
RunConfig load_config(const fs::path& path);
nlohmann::json toml_to_json(const std::string& text);

// JSON form with absolute paths. The output directory, job count, LLM mode and
// log path are omitted, so a replay elsewhere serializes identically.
nlohmann::json to_json(const RunConfig& config);

enum class Command { kExtractConcepts, kExplainPair, kEvaluate, kReport, kValidate };
std::string to_string(Command command);

// File-existence and cross-field checks for one command; empty when valid.
std::vector<std::string> validate(const RunConfig& config, Command command);

}  // namespace facexai::cli
