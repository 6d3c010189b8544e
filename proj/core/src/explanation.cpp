#include "facexai/explanation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "facexai/error.hpp"
#include "facexai/parallel.hpp"

namespace facexai {

std::string to_string(AreaWeighting w) {
  return w == AreaWeighting::kRelativeArea ? "relative-area" : "uniform";
}

AreaWeighting parse_area_weighting(std::string_view text) {
  if (text == "relative-area") return AreaWeighting::kRelativeArea;
  if (text == "uniform") return AreaWeighting::kUniform;
  throw ValidationError("unknown area weighting '" + std::string(text) +
                        "' (expected relative-area or uniform)");
}

std::vector<double> normalize_contributions(std::span<const double> c) {
  double pos = 0.0;
  double neg = 0.0;
  for (double v : c) {
    if (v >= 0.0) {
      pos += v;
    } else {
      neg -= v;
    }
  }
  std::vector<double> out(c.size(), 0.0);
  for (std::size_t n = 0; n < c.size(); ++n) {
    if (c[n] >= 0.0) {
      out[n] = pos > 0.0 ? c[n] / pos : 0.0;
    } else {
      out[n] = neg > 0.0 ? c[n] / neg : 0.0;
    }
  }
  return out;
}

namespace {

std::vector<double> paint(const RegionMaskStack& masks, std::span<const double> values) {
  std::vector<double> map(static_cast<std::size_t>(masks.width) * masks.height, 0.0);
  for (std::size_t n = 0; n < masks.size(); ++n) {
    if (values[n] == 0.0) continue;
    auto bits = masks.masks[n].data();
    for (std::size_t p = 0; p < bits.size(); ++p) {
      if (bits[p]) map[p] += values[n];
    }
  }
  return map;
}

}  // namespace

SimilarityExplanation single_removal_s0(const Embedder& embedder, const Sample& a, const Sample& b,
                                        std::span<const double> g,
                                        std::span<const std::string> region_names,
                                        const ExplainConfig& config) {
  const auto s = a.masks.size();
  if (b.masks.size() != s) {
    throw ValidationError("explain: images '" + a.image_id + "' and '" + b.image_id +
                          "' use different region counts");
  }
  if (a.masks.set_id != b.masks.set_id) {
    throw ValidationError("explain: images use different semantic sets");
  }
  if (g.size() != s) {
    throw ValidationError("explain: " + std::to_string(g.size()) + " ranking weights for " +
                          std::to_string(s) + " regions");
  }
  for (double w : g) {
    if (!(w > 0.0)) throw ValidationError("explain: ranking weights must be positive");
  }

  SimilarityExplanation ex;
  ex.image_a = a.image_id;
  ex.image_b = b.image_id;
  ex.pair_id = a.image_id + "__" + b.image_id;
  ex.set_id = a.masks.set_id;
  ex.fill = config.fill;
  ex.area_weighting = config.area_weighting;
  ex.g.assign(g.begin(), g.end());
  for (std::size_t n = 0; n < s; ++n) {
    ex.region_names.push_back(n < region_names.size() ? region_names[n]
                                                      : "region " + std::to_string(n));
  }

  const auto ea = embedder.embed(a.image);
  const auto eb = embedder.embed(b.image);
  ex.score = cosine_similarity(ea, eb);

  const double face = static_cast<double>(a.masks.face_area() + b.masks.face_area());
  ex.area_weight.assign(s, 1.0);
  ex.skipped.assign(s, 0);
  for (std::size_t n = 0; n < s; ++n) {
    const auto area_a = a.masks.masks[n].area();
    const auto area_b = b.masks.masks[n].area();
    if (area_a == 0 && area_b == 0) {
      ex.skipped[n] = 1;
      ex.warnings.push_back("region '" + ex.region_names[n] + "' has an empty mask in both images; skipped");
      continue;
    }
    if (area_a == 0 || area_b == 0) {
      ex.warnings.push_back("region '" + ex.region_names[n] + "' has an empty mask in image '" +
                            (area_a == 0 ? a.image_id : b.image_id) + "'");
    }
    if (config.area_weighting == AreaWeighting::kRelativeArea && face > 0.0) {
      ex.area_weight[n] = static_cast<double>(area_a + area_b) / face;
    }
  }

  ex.occluded_score.assign(s, ex.score);
  parallel_for(s, config.jobs, [&](std::size_t n) {
    if (ex.skipped[n]) return;
    const std::size_t region[] = {n};
    const auto oa = embedder.embed(occlude_regions(a.image, a.masks, region, config.fill));
    const auto ob = embedder.embed(occlude_regions(b.image, b.masks, region, config.fill));
    try {
      ex.occluded_score[n] = cosine_similarity(oa, ob);
    } catch (const NumericError& e) {
      throw NumericError("explain: occluding region '" + ex.region_names[n] + "': " + e.what());
    }
  });

  ex.delta.assign(s, 0.0);
  ex.contribution.assign(s, 0.0);
  for (std::size_t n = 0; n < s; ++n) {
    if (ex.skipped[n]) continue;
    ex.delta[n] = g[n] * (ex.score - ex.occluded_score[n]);
    ex.contribution[n] = ex.delta[n] * ex.area_weight[n];
  }
  ex.normalized = normalize_contributions(ex.contribution);

  ex.width_a = a.masks.width;
  ex.height_a = a.masks.height;
  ex.width_b = b.masks.width;
  ex.height_b = b.masks.height;
  ex.map_a = paint(a.masks, ex.normalized);
  ex.map_b = paint(b.masks, ex.normalized);
  return ex;
}

std::vector<std::size_t> top_k_select(std::span<const double> contributions, std::size_t k) {
  const auto s = contributions.size();
  if (k < 1 || k > s) {
    throw ValidationError("top-k: k = " + std::to_string(k) + " is outside [1, " +
                          std::to_string(s) + "]");
  }
  std::vector<std::size_t> idx(s);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(contributions[x]) > std::abs(contributions[y]);
  });
  idx.resize(k);
  return idx;
}

std::vector<std::size_t> top_k_select(const SimilarityExplanation& expl, std::size_t k) {
  return top_k_select(expl.contribution, k);
}

Image render_map(const Image& base, const RegionMaskStack& masks,
                 std::span<const double> normalized, std::span<const std::size_t> selected,
                 const Palette& palette) {
  if (base.width() != masks.width || base.height() != masks.height) {
    throw ValidationError("render: image and masks differ in size");
  }
  if (normalized.size() != masks.size()) throw ValidationError("render: one value per region expected");
  std::vector<double> values(masks.size(), 0.0);
  for (auto n : selected) values.at(n) = normalized[n];
  const auto map = paint(masks, values);
  double peak = 0.0;
  for (double v : map) peak = std::max(peak, std::abs(v));

  const int w = base.width();
  const int h = base.height();
  Image out(w, h + palette.legend_height, 3, 255);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = map[static_cast<std::size_t>(y) * w + x];
      const double alpha = peak > 0.0 ? palette.max_alpha * std::abs(v) / peak : 0.0;
      const auto& tint = v >= 0.0 ? palette.similar : palette.dissimilar;
      for (int c = 0; c < 3; ++c) {
        const double src = base.at(x, y, base.channels() == 1 ? 0 : c);
        const double mixed = (1.0 - alpha) * src + alpha * tint[static_cast<std::size_t>(c)];
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(std::clamp(mixed, 0.0, 255.0)));
      }
    }
  }
  // Legend: full purple at the left edge fading to white at the center, then
  // white to full orange at the right edge.
  for (int y = h; y < h + palette.legend_height; ++y) {
    for (int x = 0; x < w; ++x) {
      const double t = w > 1 ? 2.0 * x / (w - 1) - 1.0 : 0.0;
      const double alpha = palette.max_alpha * std::abs(t);
      const auto& tint = t >= 0.0 ? palette.similar : palette.dissimilar;
      for (int c = 0; c < 3; ++c) {
        const double mixed = (1.0 - alpha) * 255.0 + alpha * tint[static_cast<std::size_t>(c)];
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(mixed));
      }
    }
  }
  return out;
}

std::pair<Image, Image> render_pair(const SimilarityExplanation& expl, const Sample& a,
                                    const Sample& b, std::size_t k, const Palette& palette) {
  const auto selected = top_k_select(expl, k);
  return {render_map(a.image, a.masks, expl.normalized, selected, palette),
          render_map(b.image, b.masks, expl.normalized, selected, palette)};
}

ContributionTable make_table(std::span<const std::string> names, std::span<const double> values,
                             std::span<const double> normalized) {
  if (names.size() != values.size()) throw ValidationError("table: names and values differ in length");
  std::vector<double> norm(normalized.begin(), normalized.end());
  if (norm.empty()) norm = normalize_contributions(values);
  ContributionTable t;
  for (std::size_t n = 0; n < values.size(); ++n) {
    TableRow row{n, names[n], values[n], norm.at(n)};
    (values[n] < 0.0 ? t.negative : t.positive).push_back(std::move(row));
  }
  auto by_value = [](const TableRow& x, const TableRow& y) {
    return x.value < y.value || (x.value == y.value && x.region < y.region);
  };
  std::sort(t.negative.begin(), t.negative.end(), by_value);
  std::sort(t.positive.begin(), t.positive.end(), by_value);
  return t;
}

ContributionTable contribution_table(const SimilarityExplanation& expl,
                                     std::optional<std::size_t> k) {
  auto t = make_table(expl.region_names, expl.contribution, expl.normalized);
  if (!k) return t;
  const auto keep = top_k_select(expl, *k);
  auto dropped = [&](const TableRow& r) {
    return std::find(keep.begin(), keep.end(), r.region) == keep.end();
  };
  std::erase_if(t.negative, dropped);
  std::erase_if(t.positive, dropped);
  return t;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string to_markdown(const ContributionTable& table) {
  std::ostringstream md;
  md << "| Negative | Value | Positive | Value |\n";
  md << "|---|---|---|---|\n";
  const auto rows = std::max(table.negative.size(), table.positive.size());
  auto cells = [](const std::vector<TableRow>& block, std::size_t i) {
    if (i >= block.size()) return std::string(" |  |");
    return " '" + block[i].name + "' | " + format_value(block[i].value) + " |";
  };
  for (std::size_t i = 0; i < rows; ++i) {
    md << "|" << cells(table.negative, i) << cells(table.positive, i) << "\n";
  }
  return md.str();
}

std::string to_csv(const ContributionTable& table) {
  std::ostringstream csv;
  csv << "block,region_index,region,value,normalized\n";
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  char norm[64];
  for (const auto* block : {&table.negative, &table.positive}) {
    const char* label = block == &table.negative ? "negative" : "positive";
    for (const auto& r : *block) {
      std::snprintf(norm, sizeof norm, "%.6f", r.normalized);
      csv << label << "," << r.region << "," << quote(r.name) << "," << format_value(r.value) << ","
          << norm << "\n";
    }
  }
  return csv.str();
}

nlohmann::json to_json(const ContributionTable& table) {
  auto block = [](const std::vector<TableRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
      out.push_back({{"region_index", r.region},
                     {"region", r.name},
                     {"value", r.value},
                     {"display", format_value(r.value)},
                     {"normalized", r.normalized}});
    }
    return out;
  };
  return {{"negative", block(table.negative)}, {"positive", block(table.positive)}};
}

nlohmann::json to_json(const SimilarityExplanation& expl) {
  nlohmann::json regions = nlohmann::json::array();
  for (std::size_t n = 0; n < expl.size(); ++n) {
    regions.push_back({{"index", n},
                       {"name", expl.region_names[n]},
                       {"g", expl.g[n]},
                       {"area_weight", expl.area_weight[n]},
                       {"occluded_score", expl.occluded_score[n]},
                       {"delta", expl.delta[n]},
                       {"contribution", expl.contribution[n]},
                       {"normalized", expl.normalized[n]},
                       {"skipped", expl.skipped[n] != 0}});
  }
  return {{"pair_id", expl.pair_id},
          {"image_a", expl.image_a},
          {"image_b", expl.image_b},
          {"set_id", expl.set_id},
          {"score", expl.score},
          {"fill", to_string(expl.fill)},
          {"area_weighting", to_string(expl.area_weighting)},
          {"ranking", expl.ranking_source},
          {"top_k_criterion", "abs(contribution)"},
          {"regions", regions},
          {"warnings", expl.warnings}};
}

}  // namespace facexai
