#include "facexai/lint.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

#include "facexai/prompt.hpp"

namespace facexai {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

bool whole_word_at(const std::string& text, std::size_t pos, std::size_t len) {
  const bool left = pos == 0 || !is_word(text[pos - 1]);
  const bool right = pos + len >= text.size() || !is_word(text[pos + len]);
  return left && right;
}

enum class Polarity { kSimilar, kDissimilar };

constexpr const char* kSimilarWords[] = {"similar", "similarity", "similarities", "alike",
                                         "match", "matches", "matching", "same", "resemble",
                                         "resembles"};
constexpr const char* kDissimilarWords[] = {"dissimilar", "dissimilarity", "dissimilarities",
                                            "different", "difference", "differences", "differ",
                                            "differs", "unlike", "distinct"};
constexpr const char* kQuantityPhrases[] = {"distance between", "width of", "length of",
                                            "height of", "size of", "angle of", "ratio of",
                                            "shape of", "depth of"};

struct Keyword {
  std::size_t pos;
  Polarity polarity;
};

std::vector<Keyword> keywords_in(const std::string& sentence) {
  std::vector<Keyword> out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    if (!is_word(sentence[i]) || (i > 0 && is_word(sentence[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < sentence.size() && is_word(sentence[j])) ++j;
    const auto word = sentence.substr(i, j - i);
    for (const char* w : kSimilarWords) {
      if (word == w) out.push_back({i, Polarity::kSimilar});
    }
    for (const char* w : kDissimilarWords) {
      if (word == w) out.push_back({i, Polarity::kDissimilar});
    }
    i = j;
  }
  return out;
}

// Sentence boundaries: . ! ? ; or newline. A period followed by a digit is
// a decimal point.
std::vector<std::string> sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    bool boundary = c == '!' || c == '?' || c == ';' || c == '\n';
    if (c == '.') {
      boundary = i + 1 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 1]));
    }
    if (boundary) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct RegionRef {
  std::string name;      // as in the table
  std::string key;       // lower-case match key
  double value = 0.0;
};

}  // namespace

std::string to_string(LintKind kind) {
  switch (kind) {
    case LintKind::kPolarity: return "polarity";
    case LintKind::kInventedQuantity: return "invented-quantity";
    case LintKind::kInventedNumber: return "invented-number";
  }
  return "polarity";
}

std::vector<LintWarning> lint_explanation(std::string_view raw, const ContributionTable& table,
                                          std::optional<double> score) {
  std::vector<RegionRef> regions;
  for (const auto* block : {&table.negative, &table.positive}) {
    for (const auto& r : *block) regions.push_back({r.name, lower(r.name), r.value});
  }
  std::sort(regions.begin(), regions.end(), [](const RegionRef& a, const RegionRef& b) {
    return a.key.size() > b.key.size() || (a.key.size() == b.key.size() && a.key < b.key);
  });

  std::vector<LintWarning> warnings;
  const auto text = lower(raw);
  for (const auto& sentence : sentences(text)) {
    const auto keys = keywords_in(sentence);
    std::vector<bool> taken(sentence.size(), false);
    for (const auto& region : regions) {
      std::size_t pos = 0;
      while ((pos = sentence.find(region.key, pos)) != std::string::npos) {
        const auto len = region.key.size();
        const bool free = std::none_of(taken.begin() + static_cast<std::ptrdiff_t>(pos),
                                       taken.begin() + static_cast<std::ptrdiff_t>(pos + len),
                                       [](bool t) { return t; });
        if (!free || !whole_word_at(sentence, pos, len)) {
          ++pos;
          continue;
        }
        std::fill(taken.begin() + static_cast<std::ptrdiff_t>(pos),
                  taken.begin() + static_cast<std::ptrdiff_t>(pos + len), true);
        const Keyword* chosen = nullptr;
        for (const auto& k : keys) {
          if (k.pos >= pos + len) {
            chosen = &k;
            break;
          }
        }
        if (!chosen) {
          for (auto it = keys.rbegin(); it != keys.rend(); ++it) {
            if (it->pos < pos) {
              chosen = &*it;
              break;
            }
          }
        }
        if (chosen) {
          const bool table_similar = region.value >= 0.0;
          const bool text_similar = chosen->polarity == Polarity::kSimilar;
          if (table_similar != text_similar) {
            warnings.push_back({LintKind::kPolarity, region.name,
                                "'" + region.name + "' is described as " +
                                    (text_similar ? "similar" : "dissimilar") +
                                    " but its table value is " + format_value(region.value)});
          }
        }
        pos += len;
      }
    }
  }

  for (const char* phrase : kQuantityPhrases) {
    std::size_t pos = 0;
    while ((pos = text.find(phrase, pos)) != std::string::npos) {
      if (whole_word_at(text, pos, std::string_view(phrase).size())) {
        warnings.push_back({LintKind::kInventedQuantity, "",
                            std::string("mentions a quantity the table does not provide: \"") +
                                phrase + "\""});
      }
      pos += std::string_view(phrase).size();
    }
  }

  // Decimal numbers and percentages must come from the table or the score.
  static const std::regex number(R"((-?\d+\.\d+|\d+(?:\.\d+)?%))");
  std::vector<std::string> known;
  for (const auto* block : {&table.negative, &table.positive}) {
    for (const auto& r : *block) {
      known.push_back(format_value(r.value));
      known.push_back(format_value(std::abs(r.value)));
    }
  }
  if (score) {
    known.push_back(format_percentage(*score));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *score);
    known.emplace_back(buf);
  }
  for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator();
       ++it) {
    const auto token = it->str();
    bool ok = std::find(known.begin(), known.end(), token) != known.end();
    if (!ok && token.back() != '%') {
      const double v = std::stod(token);
      ok = std::find(known.begin(), known.end(), format_value(v)) != known.end();
    }
    if (!ok) {
      warnings.push_back({LintKind::kInventedNumber, "",
                          "number " + token + " does not appear in the table"});
    }
  }
  return warnings;
}

std::string describe_table(const ContributionTable& table, std::optional<double> score) {
  std::ostringstream out;
  if (score) out << "The cosine similarity is " << format_percentage(*score) << ".";
  for (const auto* block : {&table.negative, &table.positive}) {
    for (const auto& r : *block) {
      if (out.tellp() > 0) out << " ";
      out << "'" << r.name << "' is " << (r.value >= 0.0 ? "similar" : "dissimilar") << " ("
          << format_value(r.value) << ").";
    }
  }
  return out.str();
}

nlohmann::json to_json(const std::vector<LintWarning>& warnings) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& w : warnings) {
    out.push_back({{"kind", to_string(w.kind)}, {"region", w.region}, {"message", w.message}});
  }
  return out;
}

}  // namespace facexai
