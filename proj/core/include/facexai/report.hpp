#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facexai/explanation.hpp"
#include "facexai/lint.hpp"

namespace facexai {

struct ExplanationReport {
  std::string pair_id;
  double score = 0.0;
  std::string percentage;  // "NN%"
  ContributionTable table;
  std::string map_a;  // file names inside the bundle
  std::string map_b;
  std::string prompt;
  std::string prompt_hash;  // SHA-256 of prompt
  std::optional<std::string> llm_text;
  std::string llm_model;
  std::vector<LintWarning> lint;
  std::vector<std::string> notices;
  std::string timestamp;
};

nlohmann::json to_json(const ExplanationReport& report);
std::string report_markdown(const ExplanationReport& report);

}  // namespace facexai
