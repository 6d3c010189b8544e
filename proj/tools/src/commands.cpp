#include "facexai_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "facexai/aggregation.hpp"
#include "facexai/error.hpp"
#include "facexai/lime.hpp"
#include "facexai/lint.hpp"
#include "facexai/parallel.hpp"
#include "facexai/report.hpp"
#include "facexai/synthetic_embedder.hpp"
#include "facexai/version.hpp"

namespace facexai::cli {

using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ModelError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void say(const CommandOptions& o, const std::string& line) {
  if (o.log) *o.log << line << "\n";
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Per-item stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::size_t i) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Dataset make_dataset(const RunConfig& c, const SemanticSet& set, bool calibration) {
  if (c.data.synthetic) {
    auto sc = c.data.synthetic_config;
    if (calibration) sc.seed = c.data.calibration_seed;
    return make_synthetic_dataset(set, sc);
  }
  if (calibration) {
    std::vector<PairEntry> pairs;
    if (!c.data.calibration_pairs.empty()) pairs = load_pair_manifest(c.data.calibration_pairs);
    return load_dataset(load_image_manifest(c.data.calibration), set, pairs);
  }
  std::vector<PairEntry> pairs;
  if (!c.data.pairs.empty()) pairs = load_pair_manifest(c.data.pairs);
  return load_dataset(load_image_manifest(c.data.images), set, pairs);
}

std::vector<double> synthetic_weights(const RunConfig& c, std::size_t s) {
  if (!c.model.weights.empty()) return c.model.weights;
  std::vector<double> w(s);
  for (std::size_t n = 0; n < s; ++n) w[n] = static_cast<double>(s - n);
  return w;
}

std::shared_ptr<const Embedder> make_embedder(const RunConfig& c, const Dataset& ds) {
  std::shared_ptr<const Embedder> e;
  if (c.model.kind == "synthetic") {
    if (ds.samples.empty()) throw ValidationError("dataset is empty");
    SyntheticEmbedderConfig sc;
    sc.weights = synthetic_weights(c, ds.region_count());
    sc.dim = c.model.dim;
    sc.seed = c.model.seed;
    sc.offset_scale = c.model.offset_scale;
    sc.activation_channels = c.model.activation_channels;
    sc.activation_grid = c.model.activation_grid;
    sc.activation_families = c.model.activation_families;
    e = std::make_shared<SyntheticRegionEmbedder>(ds.samples.front().masks, sc);
  } else {
    e = std::make_shared<OnnxEmbedder>(c.model.onnx);
  }
  if (c.model.cache) e = std::make_shared<CachedEmbedder>(e);
  return e;
}

json provenance(const RunConfig& c, const Embedder& e, const Dataset& ds) {
  return {{"model_id", e.model_id()},
          {"images", ds.samples.size()},
          {"seed", c.seed},
          {"fill", to_string(c.fill)},
          {"tool_version", version()}};
}

void write_run_record(const RunConfig& c, Command command) {
  write_json(c.output / "run.json", run_record(c, command));
}

RunConfig resolved(RunConfig c) {
  if (c.timestamp.empty()) c.timestamp = utc_now();
  return c;
}

std::string comparison_markdown(const std::vector<GlobalConceptRanking>& rankings) {
  std::ostringstream os;
  os << "| Region |";
  for (const auto& r : rankings) os << " " << r.method << " |";
  os << "\n|---|";
  for (std::size_t i = 0; i < rankings.size(); ++i) os << "---:|";
  os << "\n";
  const auto& names = rankings.front().region_names;
  for (std::size_t n = 0; n < names.size(); ++n) {
    os << "| " << names[n] << " |";
    for (const auto& r : rankings) os << " " << r.position[n] + 1 << " |";
    os << "\n";
  }
  if (rankings.size() > 1) {
    os << "\nSpearman rank correlation\n\n|  |";
    for (const auto& r : rankings) os << " " << r.method << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < rankings.size(); ++i) os << "---:|";
    os << "\n";
    for (const auto& a : rankings) {
      os << "| " << a.method << " |";
      for (const auto& b : rankings) {
        os << " " << std::fixed << std::setprecision(4) << spearman_rho(a.order, b.order) << " |";
      }
      os << "\n";
    }
  }
  return os.str();
}

// ---- explanation -------------------------------------------------------

struct RankingInput {
  std::vector<double> g;
  std::string source;
};

RankingInput load_explain_ranking(const RunConfig& c, const Dataset& ds) {
  const auto s = ds.region_count();
  if (c.explain.ranking == "uniform") return {std::vector<double>(s, 1.0), "uniform"};
  const fs::path path(c.explain.ranking);
  GlobalConceptRanking r;
  try {
    r = ranking_from_json(json::parse(read_text(path)));
  } catch (const json::exception& e) {
    throw ValidationError("ranking '" + path.string() + "': " + e.what());
  }
  if (r.region_names != ds.region_names) {
    throw ValidationError("ranking '" + path.string() + "' was built for set '" + r.set_id +
                          "', not '" + ds.set_id + "'");
  }
  std::vector<double> g(s);
  for (std::size_t n = 0; n < s; ++n) g[n] = static_cast<double>(r.weights[n]);
  return {g, path.filename().string() + " (" + r.method + ")"};
}

PromptTemplate load_template(const RunConfig& c) {
  PromptTemplate t = PromptTemplate::standard();
  if (!c.prompt.template_path.empty()) t.text = read_text(c.prompt.template_path);
  t.toggles = c.prompt.toggles;
  t.validate();
  return t;
}

struct ExplainContext {
  const RunConfig& config;
  const CommandOptions& options;
  const Dataset& dataset;
  const Embedder& embedder;
  RankingInput ranking;
  PromptTemplate tmpl;
  LlmClient* llm = nullptr;
};

// Writes one bundle; returns its report.
ExplanationReport explain_one(const ExplainContext& ctx, const PairSpec& pair) {
  const auto& c = ctx.config;
  const auto& a = ctx.dataset.samples[pair.a];
  const auto& b = ctx.dataset.samples[pair.b];
  ExplainConfig ec{c.fill, c.explain.area_weighting, ctx.options.jobs};
  auto expl = single_removal_s0(ctx.embedder, a, b, ctx.ranking.g, ctx.dataset.region_names, ec);
  expl.pair_id = pair.pair_id;
  expl.ranking_source = ctx.ranking.source;

  const auto k = static_cast<std::size_t>(c.explain.top_k);
  const auto dir = c.output / pair.pair_id;
  const auto [map_a, map_b] = render_pair(expl, a, b, k);
  const std::string name_a = pair.pair_id + "_mapA.png";
  const std::string name_b = pair.pair_id + "_mapB.png";
  fs::create_directories(dir);
  save_png(map_a, dir / name_a);
  save_png(map_b, dir / name_b);

  const auto table = contribution_table(expl, k);
  write_json(dir / (pair.pair_id + "_table.json"), to_json(table));
  write_text(dir / (pair.pair_id + "_table.csv"), to_csv(table));
  write_text(dir / (pair.pair_id + "_table.md"), to_markdown(table));
  write_json(dir / (pair.pair_id + "_explanation.json"), to_json(expl));

  ExplanationReport rep;
  rep.pair_id = pair.pair_id;
  rep.score = expl.score;
  rep.percentage = format_percentage(expl.score);
  rep.table = table;
  rep.map_a = name_a;
  rep.map_b = name_b;
  rep.prompt = render_prompt(ctx.tmpl, expl.score, table);
  rep.prompt_hash = sha256_hex(rep.prompt);
  rep.timestamp = c.timestamp;
  rep.notices = expl.warnings;
  write_text(dir / "prompt.txt", rep.prompt);

  if (!c.llm.enabled) {
    rep.notices.push_back("LLM text disabled in the configuration");
  } else if (!ctx.llm) {
    rep.notices.push_back("offline mode without a fixture directory; LLM text omitted");
  } else {
    try {
      auto result = ctx.llm->generate(rep.prompt);
      rep.llm_text = result.text;
      rep.llm_model = c.llm.endpoint.model;
      rep.lint = lint_explanation(result.text, table, expl.score);
    } catch (const FixtureMissing& e) {
      rep.notices.push_back(std::string("offline mode: ") + e.what() + "; LLM text omitted");
    }
  }
  write_json(dir / "report.json", to_json(rep));
  write_text(dir / "report.md", report_markdown(rep));
  say(ctx.options, pair.pair_id + ": score " + rep.percentage + ", bundle " + dir.string());
  return rep;
}

std::unique_ptr<LlmClient> make_llm(const RunConfig& c, const CommandOptions& o) {
  if (!c.llm.enabled) return nullptr;
  std::optional<fs::path> fixtures;
  if (!c.llm.fixtures.empty()) fixtures = c.llm.fixtures;
  if (c.llm.mode == LlmMode::kOffline && !fixtures) return nullptr;
  std::optional<fs::path> log;
  if (!c.llm.log.empty()) log = c.llm.log;
  return std::make_unique<LlmClient>(c.llm.endpoint, c.llm.mode, fixtures, o.transport, log);
}

std::string safe_id(const std::string& text) {
  std::string out;
  for (char ch : text) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_';
    out.push_back(ok ? ch : '_');
  }
  return out;
}

}  // namespace

json run_record(const RunConfig& config, Command command) {
  return {{"tool_version", version()}, {"command", to_string(command)}, {"config", to_json(config)}};
}

void extract_concepts(const RunConfig& config, const CommandOptions& o) {
  const auto c = resolved(config);
  const auto set = load_semantic_set(c.data.set);
  const auto ds = make_dataset(c, set, true);
  const auto embedder = make_embedder(c, ds);
  const auto s = ds.region_count();
  const auto n_img = ds.samples.size();
  const auto dir = c.output / "concepts";
  say(o, "extract-concepts: " + std::to_string(n_img) + " images, " + std::to_string(s) +
             " regions, model " + embedder->model_id());

  std::vector<GlobalConceptRanking> rankings;
  for (auto method : c.concepts.methods) {
    const auto name = to_string(method);
    std::vector<std::vector<RankSequence>> per_item;
    std::vector<Attribution> attributions;
    json extra = json::object();

    if (method == Method::kEaoc) {
      EaocConfig ec{c.fill, c.concepts.representation, o.jobs};
      std::optional<ConceptGroups> groups;
      if (c.concepts.groups > 0) {
        MageConfig mc;
        mc.k = c.concepts.groups;
        mc.seed = c.seed;
        mc.jobs = o.jobs;
        groups = mage_concept_groups(*embedder, ds.samples, mc);
        write_json(dir / "groups.json", to_json(*groups));
      }
      const auto cal = calibrate_eaoc(*embedder, ds.samples, ec, groups);
      std::vector<EaocResult> results(n_img);
      EaocConfig inner = ec;
      inner.jobs = 1;
      parallel_for(n_img, o.jobs, [&](std::size_t j) {
        results[j] = eaoc_attribution(*embedder, ds.samples, cal, j, inner);
      });
      for (auto& r : results) {
        per_item.push_back(r.group_rankings);
        attributions.push_back(std::move(r.attribution));
      }
      extra = {{"representation", to_string(c.concepts.representation)},
               {"groups", c.concepts.groups}};
    } else if (method == Method::kLime) {
      attributions.resize(n_img);
      parallel_for(n_img, o.jobs, [&](std::size_t i) {
        LimeConfig lc;
        lc.samples = c.concepts.lime_samples;
        lc.kernel_width = c.concepts.lime_kernel_width;
        lc.ridge = c.concepts.lime_ridge;
        lc.seed = derive_seed(c.seed, i);
        lc.target = c.concepts.lime_target;
        lc.fill = c.fill;
        attributions[i] = lime_attribution(*embedder, ds.samples[i], lc);
      });
      for (const auto& a : attributions) per_item.push_back({a.ranking()});
    } else {
      KernelShapConfig kc;
      kc.mode = c.concepts.shap_mode;
      kc.samples = c.concepts.shap_samples;
      kc.target = c.concepts.shap_target;
      kc.fill = c.fill;
      if (c.concepts.shap_value_fn == "pair") {
        if (ds.pairs.empty()) throw ValidationError("kernelshap pair value function needs pairs");
        attributions.resize(ds.pairs.size());
        parallel_for(ds.pairs.size(), o.jobs, [&](std::size_t i) {
          auto k = kc;
          k.seed = derive_seed(c.seed, i);
          const auto& p = ds.pairs[i];
          attributions[i] =
              kernelshap_pair_attribution(*embedder, ds.samples[p.a], ds.samples[p.b], k);
        });
      } else {
        attributions.resize(n_img);
        parallel_for(n_img, o.jobs, [&](std::size_t i) {
          auto k = kc;
          k.seed = derive_seed(c.seed, i);
          attributions[i] = kernelshap_attribution(*embedder, ds.samples[i], k);
        });
      }
      for (const auto& a : attributions) per_item.push_back({a.ranking()});
      extra = {{"value_fn", c.concepts.shap_value_fn}};
    }

    auto ranking = two_level_borda(per_item);
    ranking.set_id = ds.set_id;
    ranking.method = name;
    ranking.region_names = ds.region_names;
    ranking.provenance.update(provenance(c, *embedder, ds));
    ranking.provenance.update(extra);
    write_json(dir / ("ranking_" + name + ".json"), to_json(ranking));
    write_text(dir / ("ranking_" + name + ".md"), to_markdown(ranking));
    json attr = json::array();
    for (const auto& a : attributions) attr.push_back(to_json(a));
    write_json(dir / ("attributions_" + name + ".json"), attr);
    say(o, name + ": top region '" + ds.region_names[ranking.order.front()] + "'");
    rankings.push_back(std::move(ranking));
  }
  write_text(dir / "comparison.md", comparison_markdown(rankings));
  write_run_record(c, Command::kExtractConcepts);
}

void explain_pair(const RunConfig& config, const CommandOptions& o) {
  const auto c = resolved(config);
  const auto set = load_semantic_set(c.data.set);
  const auto ds = make_dataset(c, set, false);
  const auto embedder = make_embedder(c, ds);

  PairSpec pair;
  if (!c.explain.image_a.empty()) {
    auto a = ds.find(c.explain.image_a);
    auto b = ds.find(c.explain.image_b);
    if (!a) throw ValidationError("explain: unknown image id '" + c.explain.image_a + "'");
    if (!b) throw ValidationError("explain: unknown image id '" + c.explain.image_b + "'");
    pair = {safe_id(c.explain.image_a + "_vs_" + c.explain.image_b), *a, *b};
  } else {
    auto it = std::find_if(ds.pairs.begin(), ds.pairs.end(),
                           [&](const PairSpec& p) { return p.pair_id == c.explain.pair; });
    if (it == ds.pairs.end()) throw ValidationError("explain: unknown pair id '" + c.explain.pair + "'");
    pair = *it;
  }
  auto llm = make_llm(c, o);
  ExplainContext ctx{c, o, ds, *embedder, load_explain_ranking(c, ds), load_template(c), llm.get()};
  explain_one(ctx, pair);
  write_run_record(c, Command::kExplainPair);
}

void report(const RunConfig& config, const CommandOptions& o) {
  const auto c = resolved(config);
  const auto set = load_semantic_set(c.data.set);
  const auto ds = make_dataset(c, set, false);
  if (ds.pairs.empty()) throw ValidationError("report: the dataset has no pairs");
  const auto embedder = make_embedder(c, ds);
  auto llm = make_llm(c, o);
  ExplainContext ctx{c, o, ds, *embedder, load_explain_ranking(c, ds), load_template(c), llm.get()};

  std::ostringstream index;
  index << "# Similarity explanations\n\n"
        << "Ranking: " << ctx.ranking.source << "\n\n"
        << "| Pair | Image A | Image B | Similarity | LLM text |\n|---|---|---|---:|---|\n";
  for (const auto& pair : ds.pairs) {
    const auto rep = explain_one(ctx, pair);
    index << "| [" << pair.pair_id << "](" << pair.pair_id << "/report.md) | "
          << ds.samples[pair.a].image_id << " | " << ds.samples[pair.b].image_id << " | "
          << rep.percentage << " | " << (rep.llm_text ? "yes" : "no") << " |\n";
  }
  write_text(c.output / "index.md", index.str());
  write_run_record(c, Command::kReport);
}

void evaluate(const RunConfig& config, const CommandOptions& o) {
  const auto c = resolved(config);
  const auto set = load_semantic_set(c.data.set);
  const auto ds = make_dataset(c, set, false);
  const auto target = c.evaluate.target;
  if (target == CurveTarget::kSimilarity && ds.pairs.empty()) {
    throw ValidationError("evaluate: the similarity target needs pairs");
  }
  const auto embedder = make_embedder(c, ds);
  const auto tname = to_string(target);
  const auto dir = c.output / "evaluation";

  std::vector<std::pair<std::string, RankSequence>> inputs;
  for (const auto& path : c.evaluate.rankings) {
    GlobalConceptRanking r;
    try {
      r = ranking_from_json(json::parse(read_text(path)));
    } catch (const json::exception& e) {
      throw ValidationError("ranking '" + path.string() + "': " + e.what());
    }
    if (r.region_names != ds.region_names) {
      throw ValidationError("ranking '" + path.string() + "' does not match set '" + ds.set_id + "'");
    }
    inputs.emplace_back(r.method, r.order);
  }
  if (c.evaluate.oracle) {
    inputs.emplace_back("oracle", rank_by_score(synthetic_weights(c, ds.region_count())));
  }

  EvalConfig ec{c.fill, o.jobs};
  std::vector<OcclusionCurve> curves;
  std::vector<std::string> used;
  for (const auto& [method, order] : inputs) {
    auto name = safe_id(method);
    for (int i = 2; std::count(used.begin(), used.end(), name); ++i) {
      name = safe_id(method) + "_" + std::to_string(i);
    }
    used.push_back(name);
    auto curve = occlusion_curve(*embedder, ds, order, target, ec);
    curve.method = name;
    write_json(dir / ("curve_" + name + "_" + tname + ".json"), to_json(curve));
    curves.push_back(std::move(curve));
  }
  const auto baseline = random_baseline(*embedder, ds, c.evaluate.trials, c.seed, target, ec);
  write_json(dir / ("random_" + tname + ".json"), to_json(baseline));
  const auto dom = dominance_report(curves, baseline);
  write_json(dir / ("dominance_" + tname + ".json"), to_json(dom));
  write_text(dir / ("dominance_" + tname + ".md"), dominance_markdown(dom));
  write_text(dir / ("curves_" + tname + ".svg"),
             curves_svg(curves, baseline, tname + " curves, " + ds.set_id));
  for (const auto& d : dom) {
    std::ostringstream line;
    line << d.method << ": dominates random at " << std::fixed << std::setprecision(1)
         << 100.0 * d.fraction << "% of k";
    say(o, line.str());
  }
  write_run_record(c, Command::kEvaluate);
}

}  // namespace facexai::cli
