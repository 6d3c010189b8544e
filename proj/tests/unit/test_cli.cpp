#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "facexai/aggregation.hpp"
#include "facexai/llm_client.hpp"
#include "facexai/semantics.hpp"
#include "facexai_cli/commands.hpp"
#include "test_support.hpp"

namespace facexai {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, std::shared_ptr<Transport> transport = nullptr) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(args, out, err, std::move(transport));
  r.out = out.str();
  r.err = err.str();
  return r;
}

constexpr const char* kSyntheticConfig = R"(
[run]
seed = 7
timestamp = "2026-01-01T00:00:00Z"

[model]
kind = "synthetic"

[data]
set = "set0"

[data.synthetic]
image_size = 48
images = 8
pairs = 4

[concepts]
methods = ["eaoc", "lime", "kernelshap"]
lime_samples = 300

[explain]
ranking = "out/concepts/ranking_eaoc.json"
pair = "pair_0"

[evaluate]
oracle = true
trials = 3
)";

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto path = dir / "run.toml";
  test::write_file(path, text);
  return path;
}

// Files under `root`, relative path -> bytes.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = test::read_file(e.path());
  }
  return out;
}

// Writes 32x32 images with canonical landmarks and the tiny ONNX model config.
fs::path write_onnx_project(const fs::path& dir, bool with_pairs) {
  const auto lm = canonical_landmarks(32, 32, "face");
  test::write_file(dir / "face.json", to_json(lm).dump());
  nlohmann::json images = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    Image img(32, 32, 3);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 3 + c * 50 + i * 40) % 256);
      }
    }
    const auto name = "img" + std::to_string(i);
    save_png(img, dir / (name + ".png"));
    images.push_back({{"image_id", name}, {"image_path", name + ".png"}, {"landmark_path", "face.json"}});
  }
  test::write_file(dir / "images.json", images.dump());
  test::write_file(dir / "pairs.json", R"([{"pair_id":"p01","image_a":"img0","image_b":"img1"}])");
  std::string cfg = "[model]\nkind = \"onnx\"\npath = \"" +
                    (test::fixtures_dir() / "onnx" / "tiny_embedder.onnx").string() +
                    "\"\ninput = \"input\"\noutput = \"embedding\"\nsize = 32\n\n"
                    "[data]\nset = \"set0\"\ncalibration = \"images.json\"\nimages = \"images.json\"\n";
  if (with_pairs) cfg += "pairs = \"pairs.json\"\n";
  cfg += "\n[evaluate]\nrankings = [\"ranking.json\"]\n";
  return write_config(dir, cfg);
}

TEST(Cli, ConfigErrorsAreAllListed) {
  test::TempDir dir("cli");
  const auto cfg = write_config(dir.path(), std::string(kSyntheticConfig) +
                                                "\n[llm]\nenabled = true\nmode = \"record\"\n"
                                                "colour = \"blue\"\n");
  const auto r = run({"validate-config", "-c", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("llm.colour: unknown key"), std::string::npos) << r.err;

  const auto cfg2 = write_config(dir.path(), std::string(kSyntheticConfig) +
                                                 "\n[llm]\nenabled = true\nmode = \"record\"\n");
  const auto r2 = run({"validate-config", "-c", cfg2.string()});
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.err.find("llm.model: required"), std::string::npos) << r2.err;
  EXPECT_NE(r2.err.find("llm.fixtures: required"), std::string::npos) << r2.err;
}

TEST(Cli, MissingManifestNamesTheField) {
  test::TempDir dir("cli");
  const auto cfg = write_onnx_project(dir.path(), true);
  fs::remove(dir.path() / "images.json");
  const auto r = run({"explain-pair", "-c", cfg.string(), "--pair", "p01", "--ranking", "uniform"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("data.images"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("does not exist"), std::string::npos) << r.err;
}

TEST(Cli, ValidateConfigAndVersion) {
  test::TempDir dir("cli");
  const auto cfg = write_config(dir.path(), kSyntheticConfig);
  // The ranking file only has to exist for explain commands.
  test::write_file(dir.path() / "out" / "concepts" / "ranking_eaoc.json", "{}");
  const auto r = run({"validate-config", "-c", cfg.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("config OK"), std::string::npos);
  EXPECT_EQ(run({"--version"}).code, 0);
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  EXPECT_EQ(run({"extract-concepts", "-c", cfg.string(), "--offline", "--record-fixtures"}).code, 2);
}

TEST(Cli, SyntheticPipeline) {
  test::TempDir dir("cli");
  const auto cfg = write_config(dir.path(), kSyntheticConfig);
  const auto out = dir.path() / "out";

  auto r = run({"extract-concepts", "-c", cfg.string(), "-j", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::size_t> planted(13);
  std::iota(planted.begin(), planted.end(), std::size_t{0});
  for (const char* m : {"eaoc", "lime", "kernelshap"}) {
    const auto doc = nlohmann::json::parse(
        test::read_file(out / "concepts" / (std::string("ranking_") + m + ".json")));
    EXPECT_EQ(ranking_from_json(doc).order, planted) << m;
  }
  EXPECT_TRUE(fs::exists(out / "concepts" / "comparison.md"));
  EXPECT_TRUE(fs::exists(out / "run.json"));

  r = run({"explain-pair", "-c", cfg.string(), "--top-k", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bundle = out / "pair_0";
  for (const char* f : {"pair_0_mapA.png", "pair_0_mapB.png", "pair_0_table.json", "pair_0_table.csv",
                        "pair_0_table.md", "pair_0_explanation.json", "prompt.txt", "report.json",
                        "report.md"}) {
    EXPECT_TRUE(fs::exists(bundle / f)) << f;
  }
  const auto table = nlohmann::json::parse(test::read_file(bundle / "pair_0_table.json"));
  EXPECT_EQ(table["negative"].size() + table["positive"].size(), 5u);
  const auto rep = nlohmann::json::parse(test::read_file(bundle / "report.json"));
  EXPECT_EQ(rep["notices"][0], "LLM text disabled in the configuration");
  EXPECT_EQ(rep["timestamp"], "2026-01-01T00:00:00Z");

  // An image paired with itself.
  r = run({"explain-pair", "-c", cfg.string(), "synthetic_2", "synthetic_2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto self = nlohmann::json::parse(
      test::read_file(out / "synthetic_2_vs_synthetic_2" / "synthetic_2_vs_synthetic_2_explanation.json"));
  EXPECT_EQ(self["score"], 1.0);
  for (const auto& region : self["regions"]) EXPECT_EQ(region["contribution"], 0.0);

  r = run({"evaluate", "-c", cfg.string(), "--target", "similarity"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto dom = nlohmann::json::parse(test::read_file(out / "evaluation" / "dominance_similarity.json"));
  for (const auto& d : dom) EXPECT_GE(d["fraction"].get<double>(), 0.95) << d["method"];
  EXPECT_TRUE(fs::exists(out / "evaluation" / "curves_similarity.svg"));

  r = run({"report", "-c", cfg.string(), "-o", (dir.path() / "rep").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto index = test::read_file(dir.path() / "rep" / "index.md");
  for (int k = 0; k < 4; ++k) EXPECT_NE(index.find("pair_" + std::to_string(k)), std::string::npos);
}

TEST(Cli, TopKAboveRegionCountIsRejected) {
  test::TempDir dir("cli");
  auto text = std::string(kSyntheticConfig);
  text.replace(text.find("set = \"set0\""), 12, "set = \"set2\"");
  const auto cfg = write_config(dir.path(), text);
  auto r = run({"explain-pair", "-c", cfg.string(), "--ranking", "uniform", "--top-k", "25"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = nlohmann::json::parse(test::read_file(dir.path() / "out" / "pair_0" / "pair_0_table.json"));
  EXPECT_EQ(table["negative"].size() + table["positive"].size(), 25u);
  r = run({"explain-pair", "-c", cfg.string(), "--ranking", "uniform", "--top-k", "31"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, OfflineWithoutFixturesStillSucceeds) {
  test::TempDir dir("cli");
  const auto cfg = write_config(dir.path(), std::string(kSyntheticConfig) +
                                                "\n[llm]\nenabled = true\nmodel = \"m\"\n");
  const auto r = run({"explain-pair", "-c", cfg.string(), "--ranking", "uniform", "--offline"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::json::parse(test::read_file(dir.path() / "out" / "pair_0" / "report.json"));
  EXPECT_TRUE(rep["llm_text"].is_null());
  EXPECT_NE(rep["notices"].dump().find("offline"), std::string::npos);
}

class PromptEcho final : public Transport {
 public:
  HttpResponse post(const std::string&, const std::string& body,
                    const std::map<std::string, std::string>&, double) override {
    const auto req = nlohmann::json::parse(body);
    nlohmann::json res = {{"choices", {{{"message", {{"content", req["messages"][0]["content"]}}}}}}};
    return {200, res.dump()};
  }
};

TEST(Cli, EchoEndpointReportTextEqualsPrompt) {
  test::TempDir dir("cli");
  const auto cfg = write_config(dir.path(), std::string(kSyntheticConfig) +
                                                "\n[llm]\nenabled = true\nmodel = \"echo\"\n"
                                                "fixtures = \"fixtures\"\n");
  auto r = run({"explain-pair", "-c", cfg.string(), "--ranking", "uniform", "--record-fixtures"},
               std::make_shared<PromptEcho>());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bundle = dir.path() / "out" / "pair_0";
  auto rep = nlohmann::json::parse(test::read_file(bundle / "report.json"));
  EXPECT_EQ(rep["llm_text"], test::read_file(bundle / "prompt.txt"));
  const auto recorded = test::read_file(bundle / "report.md");

  // Offline replay reproduces the bundle without a transport.
  fs::remove_all(dir.path() / "out" / "pair_0");
  r = run({"explain-pair", "-c", cfg.string(), "--ranking", "uniform", "--offline"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(test::read_file(bundle / "report.md"), recorded);
}

TEST(Cli, SimilarityTargetNeedsPairs) {
  test::TempDir dir("cli");
  const auto cfg = write_onnx_project(dir.path(), false);
  auto ranking = ranking_from_order({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  ranking.set_id = "set0";
  ranking.region_names = builtin_semantic_set("set0").names();
  test::write_file(dir.path() / "ranking.json", to_json(ranking).dump());
  auto r = run({"evaluate", "-c", cfg.string(), "--target", "similarity"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("data.pairs: the similarity target needs a pair manifest"), std::string::npos)
      << r.err;
  r = run({"evaluate", "-c", cfg.string(), "--target", "representation", "--trials", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, OnnxModelEndToEnd) {
  test::TempDir dir("cli");
  const auto cfg = write_onnx_project(dir.path(), true);
  auto r = run({"extract-concepts", "-c", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"explain-pair", "-c", cfg.string(), "--pair", "p01", "--ranking",
           (dir.path() / "out" / "concepts" / "ranking_eaoc.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto expl = nlohmann::json::parse(
      test::read_file(dir.path() / "out" / "p01" / "p01_explanation.json"));
  double pos = 0.0, neg = 0.0;
  for (const auto& region : expl["regions"]) {
    const double v = region["normalized"];
    (v >= 0.0 ? pos : neg) += v;
  }
  if (pos != 0.0) EXPECT_NEAR(pos, 1.0, 1e-9);
  if (neg != 0.0) EXPECT_NEAR(neg, -1.0, 1e-9);
}

TEST(Cli, SeededEvaluationIsRepeatable) {
  test::TempDir dir("cli");
  const auto cfg = write_config(dir.path(), kSyntheticConfig);
  const auto a = dir.path() / "a";
  const auto b = dir.path() / "b";
  ASSERT_EQ(run({"evaluate", "-c", cfg.string(), "--trials", "1", "--seed", "7", "-o", a.string()}).code, 0);
  ASSERT_EQ(run({"evaluate", "-c", cfg.string(), "--trials", "1", "--seed", "7", "-o", b.string(), "-j", "3"}).code, 0);
  EXPECT_EQ(snapshot(a), snapshot(b));
}

TEST(Cli, RunRecordReplayIsBitIdentical) {
  test::TempDir dir("cli");
  const auto cfg = write_config(dir.path(), kSyntheticConfig);
  const auto first = dir.path() / "first";
  ASSERT_EQ(run({"extract-concepts", "-c", cfg.string(), "-o", first.string(), "-j", "1"}).code, 0);
  const auto replay = dir.path() / "replay";
  const auto r = run({"extract-concepts", "-c", (first / "run.json").string(), "-o", replay.string(),
                      "-j", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(snapshot(first), snapshot(replay));
}

}  // namespace
}  // namespace facexai
