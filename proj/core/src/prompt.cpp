#include "facexai/prompt.hpp"

#include <cmath>
#include <regex>

#include "facexai/error.hpp"

namespace facexai {
namespace {

constexpr const char* kStandardTemplate =
    "Context: A face verification system assigns a cosine similarity score between two images. "
    "In this instance, the cosine similarity is [cosine_similarity_percentage]"
    "{percentage_hint} (a percentage from 0 to 100%){/percentage_hint}. "
    "From the model's knowledge, several main human-understandable concepts are extracted; "
    "these concepts are used to explain the model’s output (cosine similarity). "
    "These concepts are associated with a similar/dissimilar score. "
    "Specifically, when a value is positive or equal to zero{sign_example} (≥0){/sign_example}, "
    "the model perceives these areas in the two images as similar. "
    "Conversely, they are seen as dissimilar when the value is negative"
    "{sign_example} (example: -0.5 ){/sign_example}:[contributions_table]. "
    "Given that a color map is displayed where shades of purple indicate dissimilarity and "
    "shades of orange indicate similarity, with color intensity proportional to the magnitude "
    "of the similarity or dissimilarity, provide a simple explanation of why the cosine "
    "similarity between the two images is [cosine_similarity_percentage]."
    "{no_long_explanation} No long explanation{/no_long_explanation}";

constexpr const char* kSections[] = {"percentage_hint", "sign_example", "no_long_explanation"};

bool enabled(const PromptToggles& t, std::string_view section) {
  if (section == "percentage_hint") return t.percentage_hint;
  if (section == "sign_example") return t.sign_example;
  return t.no_long_explanation;
}

std::string apply_sections(std::string text, const PromptToggles& toggles) {
  for (const char* section : kSections) {
    const std::string open = std::string("{") + section + "}";
    const std::string close = std::string("{/") + section + "}";
    std::size_t pos = 0;
    while ((pos = text.find(open, pos)) != std::string::npos) {
      const auto end = text.find(close, pos);
      if (end == std::string::npos) {
        throw ValidationError("prompt template: unterminated section '" + open + "'");
      }
      if (enabled(toggles, section)) {
        text.erase(end, close.size());
        text.erase(pos, open.size());
      } else {
        text.erase(pos, end + close.size() - pos);
      }
    }
    if (text.find(close) != std::string::npos) {
      throw ValidationError("prompt template: '" + close + "' without an opening marker");
    }
  }
  return text;
}

void replace_all(std::string& text, std::string_view from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

PromptTemplate PromptTemplate::standard() { return {kStandardTemplate, {}}; }

void PromptTemplate::validate() const {
  const auto body = apply_sections(text, toggles);
  if (body.find(kPercentagePlaceholder) == std::string::npos) {
    throw ValidationError("prompt template: missing placeholder " + std::string(kPercentagePlaceholder));
  }
  if (body.find(kTablePlaceholder) == std::string::npos) {
    throw ValidationError("prompt template: missing placeholder " + std::string(kTablePlaceholder));
  }
}

std::string format_percentage(double score) {
  return std::to_string(std::lround(score * 100.0)) + "%";
}

std::string format_prompt_table(const ContributionTable& table) {
  return "\n" + to_markdown(table);
}

std::string render_prompt(const PromptTemplate& tmpl, double score, const ContributionTable& table) {
  tmpl.validate();
  if (table.negative.empty() && table.positive.empty()) {
    throw ValidationError("prompt: the contribution table is empty");
  }
  auto text = apply_sections(tmpl.text, tmpl.toggles);
  replace_all(text, kPercentagePlaceholder, format_percentage(score));
  replace_all(text, kTablePlaceholder, format_prompt_table(table));
  static const std::regex residual(R"(\[[a-z_]+\])");
  std::smatch m;
  if (std::regex_search(text, m, residual)) {
    throw ValidationError("prompt: unknown placeholder " + m.str() + " left after rendering");
  }
  return text;
}

std::string render_prompt(const PromptTemplate& tmpl, const SimilarityExplanation& expl) {
  return render_prompt(tmpl, expl.score, contribution_table(expl));
}

}  // namespace facexai
