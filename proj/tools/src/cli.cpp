#include <ostream>

#include <CLI11.hpp>

#include "facexai/error.hpp"
#include "facexai/parallel.hpp"
#include "facexai/version.hpp"
#include "facexai_cli/commands.hpp"

namespace facexai::cli {

namespace {

struct Flags {
  std::string config;
  int jobs = 0;
  std::string output;
  std::optional<std::uint64_t> seed;
  bool offline = false;
  bool record = false;
  std::string llm_base_url;
  std::string llm_model;
  std::string ranking;
  std::optional<int> top_k;
  std::string target;
  std::optional<int> trials;
  std::string pair;
  std::vector<std::string> images;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("-c,--config", f.config, "TOML config, or a run.json to replay")
      ->required();
  sub->add_option("-j,--jobs", f.jobs, "worker threads (default: available parallelism)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("-o,--output", f.output, "output directory");
  sub->add_option("--seed", f.seed, "run seed");
  sub->add_flag("--offline", f.offline, "replay recorded LLM completions only");
  sub->add_flag("--record-fixtures", f.record, "call the LLM and record completions");
  sub->add_option("--llm-base-url", f.llm_base_url, "chat-completions base URL");
  sub->add_option("--llm-model", f.llm_model, "LLM model name");
}

void add_explain(CLI::App* sub, Flags& f) {
  sub->add_option("--ranking", f.ranking, "ranking JSON, or 'uniform' for g_n = 1");
  sub->add_option("--top-k", f.top_k, "regions drawn on the maps and listed in the table")
      ->check(CLI::PositiveNumber);
}

void apply(const Flags& f, RunConfig& c) {
  if (!f.output.empty()) c.output = fs::absolute(f.output).lexically_normal();
  if (f.seed) c.seed = *f.seed;
  if (!f.ranking.empty()) {
    c.explain.ranking =
        f.ranking == "uniform" ? f.ranking : fs::absolute(f.ranking).lexically_normal().string();
  }
  if (f.top_k) c.explain.top_k = *f.top_k;
  if (f.offline && f.record) {
    throw ValidationError("--offline and --record-fixtures are mutually exclusive");
  }
  if (f.offline) c.llm.mode = LlmMode::kOffline;
  if (f.record) c.llm.mode = LlmMode::kRecord;
  if (!f.llm_base_url.empty()) c.llm.endpoint.base_url = f.llm_base_url;
  if (!f.llm_model.empty()) c.llm.endpoint.model = f.llm_model;
  if (!f.target.empty()) c.evaluate.target = parse_curve_target(f.target);
  if (f.trials) c.evaluate.trials = *f.trials;
  if (!f.pair.empty()) {
    c.explain.pair = f.pair;
    c.explain.image_a.clear();
    c.explain.image_b.clear();
  }
  if (!f.images.empty()) {
    if (f.images.size() != 2) throw ValidationError("explain-pair takes two image ids");
    c.explain.image_a = f.images[0];
    c.explain.image_b = f.images[1];
    c.explain.pair.clear();
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::shared_ptr<Transport> transport) {
  CLI::App app{"Face-verification explanations from semantic face regions", "facexai"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  Flags f;

  auto* extract = app.add_subcommand("extract-concepts", "rank regions globally over a dataset");
  add_common(extract, f);

  auto* explain = app.add_subcommand("explain-pair", "explain one pair's similarity score");
  add_common(explain, f);
  add_explain(explain, f);
  explain->add_option("--pair", f.pair, "pair id from the pair manifest");
  explain->add_option("images", f.images, "two image ids")->expected(0, 2);

  auto* report_cmd = app.add_subcommand("report", "explain every pair and write an index");
  add_common(report_cmd, f);
  add_explain(report_cmd, f);

  auto* eval = app.add_subcommand("evaluate", "occlusion curves against a random baseline");
  add_common(eval, f);
  eval->add_option("--target", f.target, "representation or similarity");
  eval->add_option("--trials", f.trials, "random orders")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("validate-config", "check a config and report every problem");
  add_common(check, f);

  // CLI11 wants argv order: program name first, last argument last.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    return 2;
  }

  Command command = Command::kValidate;
  if (extract->parsed()) command = Command::kExtractConcepts;
  if (explain->parsed()) command = Command::kExplainPair;
  if (report_cmd->parsed()) command = Command::kReport;
  if (eval->parsed()) command = Command::kEvaluate;

  try {
    auto config = load_config(f.config);
    apply(f, config);
    auto problems = validate(config, command);
    if (!problems.empty()) {
      std::string msg = "invalid config '" + f.config + "':";
      for (const auto& p : problems) msg += "\n  " + p;
      throw ValidationError(msg);
    }
    CommandOptions options;
    options.jobs = f.jobs > 0 ? f.jobs : (config.jobs > 0 ? config.jobs : default_jobs());
    options.log = &out;
    options.transport = std::move(transport);
    switch (command) {
      case Command::kExtractConcepts: extract_concepts(config, options); break;
      case Command::kExplainPair: explain_pair(config, options); break;
      case Command::kReport: report(config, options); break;
      case Command::kEvaluate: evaluate(config, options); break;
      case Command::kValidate: out << "config OK: " << f.config << "\n"; break;
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace facexai::cli
