#include "facexai/report.hpp"

#include <sstream>

namespace facexai {

nlohmann::json to_json(const ExplanationReport& report) {
  nlohmann::json doc = {{"pair_id", report.pair_id},
                        {"score", report.score},
                        {"percentage", report.percentage},
                        {"table", to_json(report.table)},
                        {"maps", {report.map_a, report.map_b}},
                        {"prompt", report.prompt},
                        {"prompt_hash", report.prompt_hash},
                        {"llm_model", report.llm_model},
                        {"lint", to_json(report.lint)},
                        {"notices", report.notices},
                        {"timestamp", report.timestamp}};
  doc["llm_text"] = report.llm_text ? nlohmann::json(*report.llm_text) : nlohmann::json(nullptr);
  return doc;
}

std::string report_markdown(const ExplanationReport& report) {
  std::ostringstream md;
  md << "# Explanation for " << report.pair_id << "\n\n";
  md << "Cosine similarity: " << report.percentage << "\n\n";
  md << "| Image A | Image B |\n|---|---|\n";
  md << "| ![](" << report.map_a << ") | ![](" << report.map_b << ") |\n\n";
  md << "## Contributions\n\n" << to_markdown(report.table) << "\n";
  if (report.llm_text) {
    md << "## Textual explanation (" << report.llm_model << ")\n\n" << *report.llm_text << "\n\n";
    if (!report.lint.empty()) {
      md << "### Consistency warnings (advisory)\n\n";
      for (const auto& w : report.lint) md << "- " << to_string(w.kind) << ": " << w.message << "\n";
      md << "\n";
    }
  }
  if (!report.notices.empty()) {
    md << "## Notices\n\n";
    for (const auto& n : report.notices) md << "- " << n << "\n";
    md << "\n";
  }
  md << "Prompt SHA-256: `" << report.prompt_hash << "`\n";
  return md.str();
}

}  // namespace facexai
