// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facexai/aggregation.hpp"
#include "facexai/eaoc.hpp"
#include "facexai/evaluation.hpp"
#include "facexai/explanation.hpp"
#include "facexai/kernel_shap.hpp"
#include "facexai/lime.hpp"
#include "facexai/llm_client.hpp"
#include "facexai/parallel.hpp"
#include "facexai/prompt.hpp"
#include "facexai_cli/commands.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace facexai;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 3) failures_.push_back(what);
    if (!ok) ++count_;
  }
  Outcome outcome(const std::string& summary) const {
    if (count_ == 0) return {true, summary};
    std::string d = summary + "; " + std::to_string(count_) + " failure(s):";
    for (const auto& f : failures_) d += " [" + f + "]";
    return {false, d};
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Shapley values by averaging marginal contributions over all s! orders.
std::vector<double> permutation_shapley(std::size_t s, const CoalitionValueFn& v) {
  std::vector<std::size_t> perm(s);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> phi(s, 0.0);
  std::size_t count = 0;
  do {
    std::vector<std::uint8_t> z(s, 0);
    double prev = v(z);
    for (auto n : perm) {
      z[n] = 1;
      const double cur = v(z);
      phi[n] += cur - prev;
      prev = cur;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& p : phi) p /= static_cast<double>(count);
  return phi;
}

Outcome exact_shapley_oracle() {
  Check check;
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const bool additive = c % 2 == 0;
    const std::size_t s = additive ? 3 + c % 6 : 3 + (c / 2) % 5;
    std::vector<double> a(s);
    for (auto& x : a) x = u(rng);
    const double bias = u(rng);
    // Non-additive: an arbitrary game on three chosen regions plus linear terms.
    std::vector<double> table(8);
    for (auto& x : table) x = u(rng);
    std::vector<std::size_t> trio(s);
    std::iota(trio.begin(), trio.end(), std::size_t{0});
    std::shuffle(trio.begin(), trio.end(), rng);
    trio.resize(3);
    CoalitionValueFn v = [=](Coalition z) {
      double val = bias;
      for (std::size_t n = 0; n < s; ++n) val += a[n] * z[n];
      if (!additive) {
        const int idx = z[trio[0]] | (z[trio[1]] << 1) | (z[trio[2]] << 2);
        val += table[static_cast<std::size_t>(idx)];
      }
      return val;
    };
    KernelShapConfig cfg;
    cfg.mode = ShapMode::kExact;
    const auto exact = kernel_shap(s, v, cfg);
    const auto oracle = permutation_shapley(s, v);
    for (std::size_t n = 0; n < s; ++n) worst = std::max(worst, std::abs(exact.phi[n] - oracle[n]));
    const std::vector<std::uint8_t> none(s, 0), all(s, 1);
    const double sum = std::accumulate(exact.phi.begin(), exact.phi.end(), 0.0);
    check.expect(std::abs(sum - (v(all) - v(none))) <= 1e-9, "efficiency case " + std::to_string(c));
  }
  check.expect(worst <= 1e-9, "max |exact - permutation| = " + fmt("%.3g", worst));
  return check.outcome("100 cases, max |exact - permutation| = " + fmt("%.3g", worst));
}

Outcome lime_recovery() {
  Check check;
  const std::size_t s = 13;
  std::vector<double> w(s);
  for (std::size_t n = 0; n < s; ++n) w[n] = static_cast<double>(s - n) / static_cast<double>(s);
  const RankSequence planted = rank_by_score(w);

  LimeConfig exact_cfg;
  exact_cfg.samples = 600;
  exact_cfg.ridge = 1e-8;
  exact_cfg.seed = 3;
  auto linear = [&](Coalition z) {
    double v = 0.5;
    for (std::size_t n = 0; n < s; ++n) v += w[n] * z[n];
    return v;
  };
  const auto fit = lime_surrogate(s, linear, exact_cfg);
  double worst = 0.0;
  for (std::size_t n = 0; n < s; ++n) worst = std::max(worst, std::abs(fit.coefficients[n] - w[n]));
  check.expect(worst <= 1e-6, "linear recovery error " + fmt("%.3g", worst));

  double rho_sum = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    LimeConfig cfg;
    cfg.samples = 2000;
    cfg.seed = static_cast<std::uint64_t>(seed);
    // Noise is a fixed function of the coalition and the seed.
    auto noisy = [&, seed](Coalition z) {
      std::uint64_t h = 1469598103934665603ULL ^ static_cast<std::uint64_t>(seed);
      for (auto b : z) h = (h ^ b) * 1099511628211ULL;
      std::mt19937_64 rng(h);
      std::normal_distribution<double> g(0.0, 0.01);
      return linear(z) + g(rng);
    };
    const auto f = lime_surrogate(s, noisy, cfg);
    rho_sum += spearman_rho(rank_by_score(f.coefficients), planted);
  }
  const double rho = rho_sum / 20.0;
  check.expect(rho >= 0.95, "mean rho " + fmt("%.4f", rho));
  return check.outcome("max coef error " + fmt("%.3g", worst) + ", mean rho (sigma 0.01) " +
                       fmt("%.4f", rho));
}

// Rank of j after replacing its norm, by a full stable re-sort.
std::size_t brute_rank(std::vector<double> norms, std::size_t j, std::optional<double> replacement) {
  if (replacement) norms[j] = *replacement;
  std::vector<std::size_t> idx(norms.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
  return static_cast<std::size_t>(std::find(idx.begin(), idx.end(), j) - idx.begin());
}

Outcome eaoc_correctness() {
  Check check;
  std::mt19937_64 rng(77);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 2 + rng() % 120;
    const bool coarse = c % 3 == 0;  // many exact ties
    std::vector<double> norms(n);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (auto& x : norms) x = coarse ? std::floor(u(rng)) : u(rng);
    const std::size_t j = rng() % n;
    double occluded = coarse ? std::floor(u(rng)) : u(rng);
    if (c % 5 == 0) occluded = norms[rng() % n];
    if (c % 7 == 0) occluded = norms[j];
    const OutputSpace space(norms);
    const auto before = brute_rank(norms, j, std::nullopt);
    const auto after = brute_rank(norms, j, occluded);
    const auto expected = before > after ? before - after : after - before;
    check.expect(space.rank_of(j) == before, "rank_of case " + std::to_string(c));
    check.expect(space.rank_with_replacement(j, occluded) == after, "rank query case " + std::to_string(c));
    check.expect(eaoc_score(space, j, occluded) == expected, "score case " + std::to_string(c));
  }

  // Zero-weight regions never move an image.
  std::size_t zero_checks = 0;
  for (const char* set_id : {"set0", "set2"}) {
    const auto set = builtin_semantic_set(set_id);
    std::vector<double> w = test::planted_weights(set.size());
    for (std::size_t n = 1; n < w.size(); n += 3) w[n] = 0.0;
    auto world = test::synthetic_world(set_id, 24, 0, 5, 48, w);
    const auto calib = calibrate_eaoc(*world.embedder, world.dataset.samples, {});
    for (std::size_t img = 0; img < world.dataset.samples.size(); ++img) {
      const auto r = eaoc_attribution(*world.embedder, world.dataset.samples, calib, img, {});
      for (std::size_t n = 0; n < w.size(); ++n) {
        if (w[n] != 0.0) continue;
        ++zero_checks;
        check.expect(r.attribution.scores[n] == 0.0, std::string(set_id) + " planted zero");
      }
    }
  }
  return check.outcome("1000 rank-query cases, " + std::to_string(zero_checks) +
                       " planted-zero scores");
}

struct Recovery {
  double rho = 0.0;
  double per_image_exact = 0.0;
};

Recovery recover(const test::SyntheticWorld& world, Method method, const RankSequence& planted) {
  const auto& samples = world.dataset.samples;
  std::vector<RankSequence> rankings(samples.size());
  const auto s = world.dataset.region_count();
  if (method == Method::kEaoc) {
    const auto calib = calibrate_eaoc(*world.embedder, samples, {});
    parallel_for(samples.size(), default_jobs(), [&](std::size_t i) {
      rankings[i] = eaoc_attribution(*world.embedder, samples, calib, i, {}).attribution.ranking();
    });
  } else if (method == Method::kLime) {
    parallel_for(samples.size(), default_jobs(), [&](std::size_t i) {
      LimeConfig cfg;
      cfg.seed = i;
      rankings[i] = lime_attribution(*world.embedder, samples[i], cfg).ranking();
    });
  } else {
    parallel_for(samples.size(), default_jobs(), [&](std::size_t i) {
      rankings[i] = kernelshap_attribution(*world.embedder, samples[i], {}).ranking();
    });
  }
  Recovery r;
  for (const auto& rk : rankings) r.per_image_exact += rk == planted ? 1.0 : 0.0;
  r.per_image_exact /= static_cast<double>(rankings.size());
  const auto merged = borda_aggregate(rankings);
  r.rho = s > 1 ? spearman_rho(merged.order, planted) : 1.0;
  return r;
}

// set0 restricted to its first five regions.
SemanticSet five_region_set() {
  auto set = builtin_semantic_set("set0");
  set.set_id = "set0_first5";
  set.regions.resize(5);
  return set;
}

struct PlantedWorld {
  test::SyntheticWorld world;
  RankSequence planted;
};

// Weights s..1. With `shuffled`, they are assigned in a random region order,
// so index tie-breaks cannot line up with the planted order by accident.
PlantedWorld planted_world(std::size_t s, bool shuffled) {
  PlantedWorld p;
  std::vector<std::size_t> perm(s);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (shuffled) std::shuffle(perm.begin(), perm.end(), std::mt19937_64(s));
  std::vector<double> w(s);
  for (std::size_t n = 0; n < s; ++n) w[perm[n]] = static_cast<double>(s - n);
  p.planted = rank_by_score(w);
  p.world.set = s == 5 ? five_region_set() : builtin_semantic_set("set0");
  SyntheticDatasetConfig dc;
  dc.images = 48;
  dc.pairs = 24;
  dc.seed = 100 + s;
  p.world.dataset = make_synthetic_dataset(p.world.set, dc);
  SyntheticEmbedderConfig ec;
  ec.weights = w;
  ec.seed = dc.seed;
  p.world.embedder = std::make_shared<SyntheticRegionEmbedder>(p.world.dataset.samples[0].masks, ec);
  return p;
}

Outcome planted_recovery() {
  Check check;
  std::ostringstream summary;
  for (std::size_t s : {std::size_t{5}, std::size_t{13}}) {
    const auto p = planted_world(s, true);
    for (auto m : {Method::kEaoc, Method::kLime, Method::kKernelShap}) {
      const auto r = recover(p.world, m, p.planted);
      check.expect(r.rho == 1.0, "s=" + std::to_string(s) + " " + to_string(m) + " rho " +
                                     fmt("%.4f", r.rho));
      summary << "s=" << s << " " << to_string(m) << " rho " << fmt("%.3f", r.rho)
              << " (per-image exact " << fmt("%.2f", r.per_image_exact) << "); ";
    }
  }
  auto text = summary.str();
  text.resize(text.size() - 2);
  return check.outcome(text);
}

// Not scored: the same EaOC run with weights in index order, where zero
// displacements tie and the index tie-break happens to match the plant.
void planted_recovery_index_aligned() {
  const auto p = planted_world(13, false);
  const auto r = recover(p.world, Method::kEaoc, p.planted);
  std::printf("  info: s=13 eaoc with index-aligned weights: rho %.3f (not scored)\n", r.rho);
}

Outcome curve_dominance() {
  Check check;
  auto world = test::synthetic_world("set0", 48, 24, 2024, 64);
  RankSequence oracle(13);
  std::iota(oracle.begin(), oracle.end(), std::size_t{0});
  EvalConfig cfg;
  cfg.jobs = default_jobs();
  std::ostringstream summary;
  for (auto target : {CurveTarget::kRepresentation, CurveTarget::kSimilarity}) {
    auto curve = occlusion_curve(*world.embedder, world.dataset, oracle, target, cfg);
    curve.method = "oracle";
    const auto base = random_baseline(*world.embedder, world.dataset, 20, 9, target, cfg);
    const std::vector<OcclusionCurve> methods{curve};
    const auto d = dominance_report(methods, base);
    check.expect(d[0].fraction >= 0.95, to_string(target) + " dominance " + fmt("%.3f", d[0].fraction));
    check.expect(curve.mean.back() == base.mean.back(), to_string(target) + " k=s mean differs");
    for (const auto& t : base.trials) {
      check.expect(t.mean.back() == curve.mean.back(), to_string(target) + " trial differs at k=s");
    }
    summary << to_string(target) << " dominance " << fmt("%.3f", d[0].fraction) << "; ";
  }
  auto text = summary.str();
  text += "k=s coincide";
  return check.outcome(text);
}

Outcome algorithm_invariants() {
  Check check;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> weight(0.05, 4.0);
  const char* sets[] = {"set0", "set1", "set2"};
  std::size_t pixels_checked = 0;
  for (int c = 0; c < 200; ++c) {
    const std::string set_id = sets[c % 3];
    const auto s = builtin_semantic_set(set_id).size();
    std::vector<double> w(s), g(s);
    for (auto& x : w) x = weight(rng);
    for (auto& x : g) x = weight(rng);
    auto world = test::synthetic_world(set_id, 2, 1, 5000 + c, 40, w);
    const auto& a = world.dataset.samples[0];
    const auto& b = world.dataset.samples[1];
    ExplainConfig ec;
    if (c % 2) ec.area_weighting = AreaWeighting::kUniform;
    const auto ex = single_removal_s0(*world.embedder, a, b, g, world.dataset.region_names, ec);

    double pos = 0.0, neg = 0.0;
    bool any_pos = false, any_neg = false;
    for (std::size_t n = 0; n < s; ++n) {
      if (ex.contribution[n] >= 0.0) {
        pos += ex.normalized[n];
        any_pos = any_pos || ex.contribution[n] > 0.0;
      } else {
        neg += ex.normalized[n];
        any_neg = true;
      }
    }
    if (any_pos) check.expect(std::abs(pos - 1.0) <= 1e-9, "positive sum " + fmt("%.17g", pos));
    if (any_neg) check.expect(std::abs(neg + 1.0) <= 1e-9, "negative sum " + fmt("%.17g", neg));

    // Pixels covered by exactly one region carry that region's table value.
    const auto table = contribution_table(ex);
    std::map<std::size_t, double> table_norm;
    for (const auto* block : {&table.negative, &table.positive}) {
      for (const auto& row : *block) table_norm[row.region] = row.normalized;
    }
    for (std::size_t p = 0; p < ex.map_a.size(); ++p) {
      std::size_t cover = 0, region = 0;
      for (std::size_t n = 0; n < s; ++n) {
        if (a.masks.masks[n].data()[p]) {
          ++cover;
          region = n;
        }
      }
      if (cover == 1) {
        ++pixels_checked;
        check.expect(ex.map_a[p] == table_norm.at(region), "map pixel differs from table");
      } else if (cover == 0) {
        check.expect(ex.map_a[p] == 0.0, "uncovered pixel painted");
      }
    }

    const auto self = single_removal_s0(*world.embedder, a, a, g, world.dataset.region_names, ec);
    for (std::size_t n = 0; n < s; ++n) {
      check.expect(self.contribution[n] == 0.0 && self.normalized[n] == 0.0,
                   "identical pair nonzero at region " + std::to_string(n));
    }
    for (double v : self.map_a) check.expect(v == 0.0, "identical pair map nonzero");
  }
  return check.outcome("200 pairs, " + std::to_string(pixels_checked) +
                       " single-region pixels matched, identical pairs all zero");
}

Outcome example_table_round_trip() {
  Check check;
  const std::vector<std::string> names{
      "Lower area around the right eye", "Right eye", "Left eye", "Upper area of the mouth",
      "Central area of the forehead", "Right Cheek", "Left Cheek", "Left side of the nose",
      "Lower area of the mouth", "Right side of the nose"};
  const std::vector<double> values{-0.0041, -0.0039, -0.0024, -0.0005, -0.0002,
                                   -0.0001, 0.0001,  0.0003,  0.0003,  0.0010};
  const auto table = make_table(names, values);
  check.expect(table.negative.size() == 6 && table.positive.size() == 4, "6/4 partition");
  for (std::size_t i = 0; i < table.negative.size(); ++i) {
    check.expect(table.negative[i].name == names[i], "negative order at " + std::to_string(i));
  }
  for (std::size_t i = 0; i < table.positive.size(); ++i) {
    check.expect(table.positive[i].name == names[6 + i], "positive order at " + std::to_string(i));
  }
  const auto top = top_k_select(values, 3);
  std::vector<std::string> top_names;
  for (auto n : top) top_names.push_back(names[n]);
  check.expect(top_names == std::vector<std::string>{"Lower area around the right eye", "Right eye",
                                                     "Left eye"},
               "top-3 selection");
  const auto prompt = render_prompt(PromptTemplate::standard(), 0.64, table);
  check.expect(prompt.find("64%") != std::string::npos, "prompt lacks 64%");
  check.expect(prompt.find(kPercentagePlaceholder) == std::string::npos, "percentage placeholder left");
  check.expect(prompt.find(kTablePlaceholder) == std::string::npos, "table placeholder left");
  check.expect(prompt.find(to_markdown(table)) != std::string::npos, "table not substituted");

  auto golden = [&](const std::string& name, const std::string& actual) {
    const auto path = test::golden_dir() / name;
    check.expect(fs::exists(path) && test::read_file(path) == actual, "golden " + name);
  };
  golden("example_table.md", to_markdown(table));
  golden("example_table.csv", to_csv(table));
  golden("example_prompt.txt", prompt);
  auto tmpl = PromptTemplate::standard();
  tmpl.toggles.no_long_explanation = false;
  golden("example_prompt_no_long_explanation.txt", render_prompt(tmpl, 0.64, table));
  return check.outcome("6 negative / 4 positive, top-3 eyes, prompt at 64%, 4 golden files");
}

Outcome borda_properties() {
  Check check;
  std::mt19937_64 rng(8);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t s = 2 + rng() % 12;
    const std::size_t m = 1 + rng() % 25;
    std::vector<RankSequence> profile(m, RankSequence(s));
    for (auto& r : profile) {
      std::iota(r.begin(), r.end(), std::size_t{0});
      std::shuffle(r.begin(), r.end(), rng);
    }
    // Brute force: a region earns one point per region ranked below it.
    std::vector<std::int64_t> points(s, 0);
    for (const auto& r : profile) {
      for (std::size_t x = 0; x < s; ++x) {
        for (std::size_t y = x + 1; y < s; ++y) ++points[r[x]];
      }
    }
    const auto got = borda_aggregate(profile);
    check.expect(got.points == points, "points differ in case " + std::to_string(c));
    const auto total = std::accumulate(got.points.begin(), got.points.end(), std::int64_t{0});
    check.expect(total == static_cast<std::int64_t>(m * s * (s - 1) / 2), "points-sum identity");
    for (std::size_t p = 1; p < s; ++p) {
      const auto hi = got.order[p - 1], lo = got.order[p];
      check.expect(points[hi] > points[lo] || (points[hi] == points[lo] && hi < lo), "order");
    }

    auto shuffled = profile;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = borda_aggregate(shuffled);
    check.expect(again.order == got.order && again.points == got.points, "anonymity");

    // Unanimity: a pair ordered the same way by every voter keeps that order.
    for (std::size_t x = 0; x < s; ++x) {
      for (std::size_t y = 0; y < s; ++y) {
        if (x == y) continue;
        const bool all_prefer = std::all_of(profile.begin(), profile.end(), [&](const RankSequence& r) {
          return std::find(r.begin(), r.end(), x) < std::find(r.begin(), r.end(), y);
        });
        if (all_prefer) check.expect(got.position[x] < got.position[y], "unanimity");
      }
    }
    const std::vector<RankSequence> same(m, profile[0]);
    check.expect(borda_aggregate(same).order == profile[0], "unanimous profile");
  }
  return check.outcome("1000 profiles against brute-force counts");
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = test::read_file(e.path());
  }
  return out;
}

class CannedTransport final : public Transport {
 public:
  HttpResponse post(const std::string&, const std::string& body,
                    const std::map<std::string, std::string>&, double) override {
    const auto req = nlohmann::json::parse(body);
    const auto prompt = req["messages"][0]["content"].get<std::string>();
    const auto text = "Echo of a " + std::to_string(prompt.size()) + "-character prompt.";
    return {200, nlohmann::json{{"choices", {{{"message", {{"content", text}}}}}}}.dump()};
  }
};

int cli(std::vector<std::string> args, std::shared_ptr<Transport> transport = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err, std::move(transport));
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

Outcome replay_determinism() {
  Check check;
  test::TempDir dir("acceptance");
  const auto root = dir.path();
  test::write_file(root / "run.toml", R"(
[run]
seed = 11

[model]
kind = "synthetic"
activation_channels = 8

[data]
set = "set0"

[data.synthetic]
images = 16
pairs = 4

[concepts]
methods = ["eaoc", "lime", "kernelshap"]
lime_samples = 400

[explain]
ranking = "extract/concepts/ranking_eaoc.json"

[evaluate]
rankings = ["extract/concepts/ranking_eaoc.json", "extract/concepts/ranking_lime.json"]
oracle = true
target = "similarity"
trials = 5

[llm]
enabled = true
model = "canned"
fixtures = "fixtures"
)");
  const auto cfg = (root / "run.toml").string();
  auto transport = std::make_shared<CannedTransport>();
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"extract", {"extract-concepts"}},
      {"evaluate", {"evaluate"}},
      {"report", {"report", "--record-fixtures"}},
  };
  std::size_t files = 0;
  for (const auto& [name, args] : runs) {
    auto first = args;
    for (const auto& a : {"-c", cfg.c_str(), "-j", "1", "-o"}) first.emplace_back(a);
    first.push_back((root / name).string());
    check.expect(cli(first, transport) == 0, name + " failed");
    for (const char* jobs : {"1", "3"}) {
      const auto out = root / (name + "_replay_j" + jobs);
      check.expect(cli({args[0], "-c", (root / name / "run.json").string(), "--offline", "-j", jobs,
                        "-o", out.string()}) == 0,
                   name + " replay failed");
      const auto a = snapshot(root / name);
      const auto b = snapshot(out);
      check.expect(a == b, name + " replay with -j " + jobs + " differs");
      files += b.size();
    }
  }
  const auto report = nlohmann::json::parse(test::read_file(root / "report" / "pair_0" / "report.json"));
  check.expect(report["llm_text"].is_string(), "replayed report lacks LLM text");
  return check.outcome(std::to_string(files) + " replayed files identical across -j 1 and -j 3");
}

}  // namespace

int main(int argc, char** argv) {
  // --known-failure N: criterion N still prints FAIL but does not set the
  // exit code.
  std::vector<int> known;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--known-failure") known.push_back(std::atoi(argv[++i]));
  }
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0: no limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "exact Shapley oracle", 10, exact_shapley_oracle},
      {2, "LIME linear recovery", 30, lime_recovery},
      {3, "EaOC rank query", 20, eaoc_correctness},
      {4, "planted-ranking recovery", 120, planted_recovery},
      {5, "curve dominance", 120, curve_dominance},
      {6, "single-removal invariants", 60, algorithm_invariants},
      {7, "example table round trip", 0, example_table_round_trip},
      {8, "BORDA properties", 10, borda_properties},
      {9, "run.json replay determinism", 0, replay_determinism},
  };
  int failed = 0;
  int unexcused = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.limit_seconds) + " s budget";
    }
    std::printf("criterion %d %-28s %s  %7.2f s  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
    const bool excused = std::find(known.begin(), known.end(), c.id) != known.end();
    if (!o.pass && excused) std::printf("  known failure, excluded from the exit code\n");
    failed += o.pass ? 0 : 1;
    unexcused += o.pass || excused ? 0 : 1;
    if (c.id == 4) planted_recovery_index_aligned();
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return unexcused == 0 ? 0 : 1;
}
