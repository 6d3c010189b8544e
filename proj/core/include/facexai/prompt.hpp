#pragma once

#include <string>
#include <string_view>

#include "facexai/explanation.hpp"

namespace facexai {

inline constexpr std::string_view kPercentagePlaceholder = "[cosine_similarity_percentage]";
inline constexpr std::string_view kTablePlaceholder = "[contributions_table]";

struct PromptToggles {
  bool percentage_hint = true;      // "(a percentage from 0 to 100%)"
  bool sign_example = true;         // "(>=0)" and "(example: -0.5 )"
  bool no_long_explanation = true;  // trailing "No long explanation"
};

// Template text with the two placeholders. Optional clauses are wrapped as
// {percentage_hint}...{/percentage_hint}, {sign_example}...{/sign_example}
// and {no_long_explanation}...{/no_long_explanation}.
struct PromptTemplate {
  std::string text;
  PromptToggles toggles;

  static PromptTemplate standard();
  // Throws ValidationError when a placeholder is missing or a section marker
  // is unbalanced.
  void validate() const;
};

// round(score * 100) followed by '%'.
std::string format_percentage(double score);
// Two-block listing, values at 4 decimals.
std::string format_prompt_table(const ContributionTable& table);

std::string render_prompt(const PromptTemplate& tmpl, double score, const ContributionTable& table);
std::string render_prompt(const PromptTemplate& tmpl, const SimilarityExplanation& expl);

}  // namespace facexai
