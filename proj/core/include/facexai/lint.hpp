#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "facexai/explanation.hpp"

namespace facexai {

enum class LintKind { kPolarity, kInventedQuantity, kInventedNumber };
std::string to_string(LintKind kind);

struct LintWarning {
  LintKind kind = LintKind::kPolarity;
  std::string region;  // empty unless kind is kPolarity
  std::string message;
};

// Advisory keyword check of an LLM explanation against the table. Each
// region mention takes the next polarity word in its sentence, otherwise the
// previous one. Never throws on text content.
std::vector<LintWarning> lint_explanation(std::string_view text, const ContributionTable& table,
                                          std::optional<double> score = std::nullopt);

// Text in the phrase pattern the lint accepts:
// "The cosine similarity is NN%. 'Region' is similar (0.0001). ..."
std::string describe_table(const ContributionTable& table, std::optional<double> score = std::nullopt);

nlohmann::json to_json(const std::vector<LintWarning>& warnings);

}  // namespace facexai
