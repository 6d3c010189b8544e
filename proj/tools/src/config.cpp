#include "facexai_cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "facexai/error.hpp"
#include "facexai/semantics.hpp"

namespace facexai::cli {

using nlohmann::json;

namespace {

json toml_node_to_json(const toml::node& node) {
  if (auto* t = node.as_table()) {
    json out = json::object();
    for (auto&& [k, v] : *t) out[std::string(k.str())] = toml_node_to_json(v);
    return out;
  }
  if (auto* a = node.as_array()) {
    json out = json::array();
    for (auto&& v : *a) out.push_back(toml_node_to_json(v));
    return out;
  }
  if (auto* v = node.as_string()) return v->get();
  if (auto* v = node.as_integer()) return v->get();
  if (auto* v = node.as_floating_point()) return v->get();
  if (auto* v = node.as_boolean()) return v->get();
  std::ostringstream os;
  node.visit([&](auto&& v) { os << v; });
  return os.str();  // dates and times as text
}

// Typed field access over one JSON object. Problems are appended to a shared
// list; keys never read are reported as unknown by finish().
class Section {
 public:
  Section(const json* obj, std::string name, const fs::path& base,
          std::vector<std::string>& errors)
      : obj_(obj), name_(std::move(name)), base_(base), errors_(errors) {
    if (obj_ && !obj_->is_object()) {
      fail("", "expected a table");
      obj_ = nullptr;
    }
  }

  bool has(const char* key) const { return obj_ && obj_->contains(key); }

  const json* raw(const char* key) {
    known_.insert(key);
    if (!obj_) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  void get(const char* key, bool& out) {
    if (auto* v = raw(key)) {
      if (v->is_boolean()) out = v->get<bool>();
      else fail(key, "expected a boolean");
    }
  }
  void get(const char* key, int& out) {
    if (auto* v = raw(key)) {
      if (v->is_number_integer()) out = v->get<int>();
      else fail(key, "expected an integer");
    }
  }
  void get(const char* key, std::uint64_t& out) {
    if (auto* v = raw(key)) {
      if (v->is_number_unsigned()) out = v->get<std::uint64_t>();
      else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) out = v->get<std::uint64_t>();
      else if (v->is_number_integer()) fail(key, "expected a non-negative integer");
      else fail(key, "expected an integer");
    }
  }
  void get(const char* key, double& out) {
    if (auto* v = raw(key)) {
      if (v->is_number()) out = v->get<double>();
      else fail(key, "expected a number");
    }
  }
  void get(const char* key, std::string& out) {
    if (auto* v = raw(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else fail(key, "expected a string");
    }
  }
  void get(const char* key, std::vector<double>& out) {
    if (auto* v = raw(key)) {
      if (!v->is_array()) return fail(key, "expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) return fail(key, "expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }
  void get(const char* key, std::vector<std::string>& out) {
    if (auto* v = raw(key)) {
      if (v->is_string()) {
        out = {v->get<std::string>()};
        return;
      }
      if (!v->is_array()) return fail(key, "expected an array of strings");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_string()) return fail(key, "expected an array of strings");
        out.push_back(x.get<std::string>());
      }
    }
  }
  void path(const char* key, fs::path& out) {
    std::string text;
    if (!has(key)) {
      raw(key);
      return;
    }
    get(key, text);
    if (!text.empty()) out = resolve(text);
  }
  fs::path resolve(const std::string& text) const {
    fs::path p(text);
    if (p.is_relative()) p = base_ / p;
    return p.lexically_normal();
  }

  // Parses `key` with `parse`, reporting the library's message on failure.
  template <class T, class Parse>
  void parsed(const char* key, T& out, Parse parse) {
    std::string text;
    if (!has(key)) {
      raw(key);
      return;
    }
    get(key, text);
    try {
      out = parse(text);
    } catch (const Error& e) {
      fail(key, e.what());
    }
  }

  void fail(const std::string& key, const std::string& message) {
    errors_.push_back(qualified(key) + ": " + message);
  }
  std::string qualified(const std::string& key) const {
    return key.empty() ? name_ : name_ + "." + key;
  }

  void finish() {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!known_.count(it.key())) errors_.push_back(qualified(it.key()) + ": unknown key");
    }
  }

 private:
  const json* obj_;
  std::string name_;
  fs::path base_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

const json* child(const json& doc, const char* key) {
  auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

LlmMode parse_mode(std::string_view text) {
  if (text == "live") return LlmMode::kLive;
  if (text == "record") return LlmMode::kRecord;
  if (text == "offline") return LlmMode::kOffline;
  throw ValidationError("unknown LLM mode '" + std::string(text) +
                        "' (expected live, record or offline)");
}

std::string path_text(const fs::path& p) { return p.empty() ? std::string() : p.string(); }

}  // namespace

json toml_to_json(const std::string& text) {
  try {
    return toml_node_to_json(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " at line " << e.source().begin.line;
    throw ValidationError(os.str());
  }
}

std::vector<std::string> parse_config(const json& doc, const fs::path& base, RunConfig& out) {
  std::vector<std::string> errors;
  if (!doc.is_object()) return {"config: expected a table at the top level"};

  Section top(&doc, "config", base, errors);
  for (const char* k : {"run", "model", "data", "concepts", "explain", "evaluate", "llm",
                        "prompt"}) {
    top.raw(k);
  }
  top.finish();

  {
    Section s(child(doc, "run"), "run", base, errors);
    s.path("output", out.output);
    s.get("seed", out.seed);
    s.get("jobs", out.jobs);
    if (out.jobs < 0) s.fail("jobs", "must be >= 0");
    s.parsed("fill", out.fill, parse_fill_strategy);
    s.get("timestamp", out.timestamp);
    s.finish();
  }
  {
    auto& m = out.model;
    Section s(child(doc, "model"), "model", base, errors);
    s.get("kind", m.kind);
    if (m.kind != "synthetic" && m.kind != "onnx") {
      s.fail("kind", "expected 'synthetic' or 'onnx', got '" + m.kind + "'");
    }
    s.get("cache", m.cache);
    s.get("weights", m.weights);
    s.get("dim", m.dim);
    s.get("seed", m.seed);
    s.get("offset_scale", m.offset_scale);
    s.get("activation_channels", m.activation_channels);
    s.get("activation_grid", m.activation_grid);
    s.get("activation_families", m.activation_families);
    s.path("path", m.onnx.model_path);
    s.get("input", m.onnx.input_name);
    s.get("output", m.onnx.output_name);
    std::string act;
    s.get("activations", act);
    if (!act.empty()) m.onnx.activation_name = act;
    if (auto* v = s.raw("size")) {
      if (v->is_number_integer()) {
        m.onnx.input_width = m.onnx.input_height = v->get<int>();
      } else if (v->is_array() && v->size() == 2 && (*v)[0].is_number_integer() &&
                 (*v)[1].is_number_integer()) {
        m.onnx.input_width = (*v)[0].get<int>();
        m.onnx.input_height = (*v)[1].get<int>();
      } else {
        s.fail("size", "expected an integer or [width, height]");
      }
    }
    for (auto [key, arr] : {std::pair{"mean", &m.onnx.mean}, std::pair{"scale", &m.onnx.scale}}) {
      std::vector<double> v;
      s.get(key, v);
      if (v.empty()) continue;
      if (v.size() == 1) arr->fill(v[0]);
      else if (v.size() == 3) std::copy(v.begin(), v.end(), arr->begin());
      else s.fail(key, "expected 1 or 3 values");
    }
    s.get("bgr", m.onnx.bgr);
    s.get("model_id", m.onnx.model_id);
    s.finish();
  }
  {
    auto& d = out.data;
    const json* data = child(doc, "data");
    Section s(data, "data", base, errors);
    std::string set = d.set;
    s.get("set", set);
    // A built-in id stays as is; anything else is a file path.
    bool builtin = false;
    for (const auto& id : builtin_semantic_set_ids()) builtin = builtin || id == set;
    d.set = builtin ? set : s.resolve(set).string();
    s.path("calibration", d.calibration);
    s.path("calibration_pairs", d.calibration_pairs);
    s.path("images", d.images);
    s.path("pairs", d.pairs);
    if (auto* v = s.raw("synthetic")) {
      if (v->is_boolean()) {
        d.synthetic = v->get<bool>();
        d.calibration_seed = d.synthetic_config.seed + 1;
      } else if (v->is_object()) {
        d.synthetic = true;
        auto& c = d.synthetic_config;
        Section t(v, "data.synthetic", base, errors);
        t.get("image_size", c.image_size);
        t.get("images", c.images);
        t.get("pairs", c.pairs);
        t.get("seed", c.seed);
        t.get("min_amplitude", c.min_amplitude);
        t.get("max_amplitude", c.max_amplitude);
        d.calibration_seed = c.seed + 1;
        t.get("calibration_seed", d.calibration_seed);
        t.finish();
      } else {
        s.fail("synthetic", "expected a boolean or a table");
      }
    }
    s.finish();
  }
  {
    auto& c = out.concepts;
    Section s(child(doc, "concepts"), "concepts", base, errors);
    std::vector<std::string> methods;
    s.get("methods", methods);
    if (s.has("methods")) {
      c.methods.clear();
      for (const auto& m : methods) {
        try {
          auto parsed = parse_method(m);
          if (std::find(c.methods.begin(), c.methods.end(), parsed) != c.methods.end()) {
            s.fail("methods", "'" + m + "' listed twice");
          } else {
            c.methods.push_back(parsed);
          }
        } catch (const Error& e) {
          s.fail("methods", e.what());
        }
      }
      if (c.methods.empty()) s.fail("methods", "at least one method is required");
    }
    s.parsed("representation", c.representation, parse_representation);
    s.get("groups", c.groups);
    if (c.groups < 0) s.fail("groups", "must be >= 0");
    s.get("lime_samples", c.lime_samples);
    s.get("lime_kernel_width", c.lime_kernel_width);
    s.get("lime_ridge", c.lime_ridge);
    s.parsed("lime_target", c.lime_target, parse_norm);
    s.parsed("shap_mode", c.shap_mode, parse_shap_mode);
    s.get("shap_samples", c.shap_samples);
    s.get("shap_value_fn", c.shap_value_fn);
    if (c.shap_value_fn != "single" && c.shap_value_fn != "pair") {
      s.fail("shap_value_fn", "expected 'single' or 'pair'");
    }
    s.parsed("shap_target", c.shap_target, parse_norm);
    if (c.lime_samples < 2) s.fail("lime_samples", "must be >= 2");
    if (!(c.lime_kernel_width > 0.0)) s.fail("lime_kernel_width", "must be > 0");
    if (!(c.lime_ridge >= 0.0)) s.fail("lime_ridge", "must be >= 0");
    if (c.shap_samples < 0) s.fail("shap_samples", "must be >= 0");
    s.finish();
  }
  {
    auto& e = out.explain;
    Section s(child(doc, "explain"), "explain", base, errors);
    std::string ranking = e.ranking;
    s.get("ranking", ranking);
    e.ranking = ranking == "uniform" ? ranking : s.resolve(ranking).string();
    s.get("top_k", e.top_k);
    if (e.top_k < 1) s.fail("top_k", "must be >= 1");
    s.parsed("area_weighting", e.area_weighting, parse_area_weighting);
    s.get("pair", e.pair);
    s.get("image_a", e.image_a);
    s.get("image_b", e.image_b);
    if (e.image_a.empty() != e.image_b.empty()) {
      s.fail("image_a", "image_a and image_b must be given together");
    }
    s.finish();
  }
  {
    auto& e = out.evaluate;
    Section s(child(doc, "evaluate"), "evaluate", base, errors);
    s.parsed("target", e.target, parse_curve_target);
    s.get("trials", e.trials);
    if (e.trials < 1) s.fail("trials", "must be >= 1");
    std::vector<std::string> rankings;
    s.get("rankings", rankings);
    if (s.has("rankings")) {
      e.rankings.clear();
      for (const auto& r : rankings) e.rankings.push_back(s.resolve(r));
    }
    s.get("oracle", e.oracle);
    s.finish();
  }
  {
    auto& l = out.llm;
    Section s(child(doc, "llm"), "llm", base, errors);
    s.get("enabled", l.enabled);
    s.get("base_url", l.endpoint.base_url);
    s.get("model", l.endpoint.model);
    s.get("api_key_env", l.endpoint.api_key_env);
    s.get("temperature", l.endpoint.temperature);
    s.get("max_tokens", l.endpoint.max_tokens);
    s.get("timeout", l.endpoint.timeout_seconds);
    s.get("retries", l.endpoint.retries);
    s.get("rate", l.endpoint.max_requests_per_second);
    s.parsed("mode", l.mode, parse_mode);
    s.path("fixtures", l.fixtures);
    s.path("log", l.log);
    if (l.endpoint.retries < 0) s.fail("retries", "must be >= 0");
    if (!(l.endpoint.timeout_seconds > 0.0)) s.fail("timeout", "must be > 0");
    if (l.endpoint.max_tokens < 1) s.fail("max_tokens", "must be >= 1");
    if (l.endpoint.max_requests_per_second < 0.0) s.fail("rate", "must be >= 0");
    s.finish();
  }
  {
    auto& p = out.prompt;
    Section s(child(doc, "prompt"), "prompt", base, errors);
    s.get("percentage_hint", p.toggles.percentage_hint);
    s.get("sign_example", p.toggles.sign_example);
    s.get("no_long_explanation", p.toggles.no_long_explanation);
    s.path("template", p.template_path);
    s.finish();
  }
  return errors;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config '" + path.string() + "' cannot be read");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  if (path.extension() == ".json") {
    try {
      doc = json::parse(buf.str());
    } catch (const json::exception& e) {
      throw ValidationError("config '" + path.string() + "': " + e.what());
    }
    // A run.json written by a previous run.
    if (doc.is_object() && doc.contains("tool_version") && doc.contains("config")) {
      doc = doc["config"];
    }
  } else {
    doc = toml_to_json(buf.str());
  }
  RunConfig config;
  const auto base = fs::absolute(path).parent_path();
  config.output = base / "out";
  auto errors = parse_config(doc, base, config);
  if (!errors.empty()) {
    std::string msg = "invalid config '" + path.string() + "':";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return config;
}

json to_json(const RunConfig& c) {
  json methods = json::array();
  for (auto m : c.concepts.methods) methods.push_back(to_string(m));
  json rankings = json::array();
  for (const auto& r : c.evaluate.rankings) rankings.push_back(path_text(r));
  const auto& m = c.model;
  const auto& d = c.data;
  const auto& sc = d.synthetic_config;
  json model = {{"kind", m.kind}, {"cache", m.cache}};
  if (m.kind == "synthetic") {
    model.update({{"weights", m.weights},
                  {"dim", m.dim},
                  {"seed", m.seed},
                  {"offset_scale", m.offset_scale},
                  {"activation_channels", m.activation_channels},
                  {"activation_grid", m.activation_grid},
                  {"activation_families", m.activation_families}});
  } else {
    model.update({{"path", path_text(m.onnx.model_path)},
                  {"input", m.onnx.input_name},
                  {"output", m.onnx.output_name},
                  {"activations", m.onnx.activation_name.value_or("")},
                  {"size", {m.onnx.input_width, m.onnx.input_height}},
                  {"mean", m.onnx.mean},
                  {"scale", m.onnx.scale},
                  {"bgr", m.onnx.bgr},
                  {"model_id", m.onnx.model_id}});
  }
  json data = {{"set", d.set},
               {"calibration", path_text(d.calibration)},
               {"calibration_pairs", path_text(d.calibration_pairs)},
               {"images", path_text(d.images)},
               {"pairs", path_text(d.pairs)}};
  if (d.synthetic) {
    data["synthetic"] = {{"image_size", sc.image_size},   {"images", sc.images},
                         {"pairs", sc.pairs},             {"seed", sc.seed},
                         {"min_amplitude", sc.min_amplitude},
                         {"max_amplitude", sc.max_amplitude},
                         {"calibration_seed", d.calibration_seed}};
  }
  const auto& k = c.concepts;
  const auto& e = c.llm.endpoint;
  return {
      {"run", {{"seed", c.seed}, {"fill", to_string(c.fill)}, {"timestamp", c.timestamp}}},
      {"model", model},
      {"data", data},
      {"concepts",
       {{"methods", methods},
        {"representation", to_string(k.representation)},
        {"groups", k.groups},
        {"lime_samples", k.lime_samples},
        {"lime_kernel_width", k.lime_kernel_width},
        {"lime_ridge", k.lime_ridge},
        {"lime_target", to_string(k.lime_target)},
        {"shap_mode", to_string(k.shap_mode)},
        {"shap_samples", k.shap_samples},
        {"shap_value_fn", k.shap_value_fn},
        {"shap_target", to_string(k.shap_target)}}},
      {"explain",
       {{"ranking", c.explain.ranking},
        {"top_k", c.explain.top_k},
        {"area_weighting", to_string(c.explain.area_weighting)},
        {"pair", c.explain.pair},
        {"image_a", c.explain.image_a},
        {"image_b", c.explain.image_b}}},
      {"evaluate",
       {{"target", to_string(c.evaluate.target)},
        {"trials", c.evaluate.trials},
        {"rankings", rankings},
        {"oracle", c.evaluate.oracle}}},
      {"llm",
       {{"enabled", c.llm.enabled},
        {"base_url", e.base_url},
        {"model", e.model},
        {"api_key_env", e.api_key_env},
        {"temperature", e.temperature},
        {"max_tokens", e.max_tokens},
        {"timeout", e.timeout_seconds},
        {"retries", e.retries},
        {"rate", e.max_requests_per_second},
        {"fixtures", path_text(c.llm.fixtures)}}},
      {"prompt",
       {{"percentage_hint", c.prompt.toggles.percentage_hint},
        {"sign_example", c.prompt.toggles.sign_example},
        {"no_long_explanation", c.prompt.toggles.no_long_explanation},
        {"template", path_text(c.prompt.template_path)}}},
  };
}

std::string to_string(Command command) {
  switch (command) {
    case Command::kExtractConcepts: return "extract-concepts";
    case Command::kExplainPair: return "explain-pair";
    case Command::kEvaluate: return "evaluate";
    case Command::kReport: return "report";
    case Command::kValidate: return "validate-config";
  }
  return "?";
}

std::vector<std::string> validate(const RunConfig& c, Command command) {
  std::vector<std::string> errors;
  auto need_file = [&](const fs::path& p, const std::string& field) {
    if (p.empty()) {
      errors.push_back(field + ": required");
    } else if (!fs::is_regular_file(p)) {
      errors.push_back(field + ": '" + p.string() + "' does not exist");
    }
  };
  const bool all = command == Command::kValidate;
  const bool extract = all || command == Command::kExtractConcepts;
  const bool explain = all || command == Command::kExplainPair || command == Command::kReport;
  const bool evaluate = all || command == Command::kEvaluate;

  std::optional<SemanticSet> set;
  try {
    set = load_semantic_set(c.data.set);
  } catch (const Error& e) {
    errors.push_back(std::string("data.set: ") + e.what());
  }

  const auto& m = c.model;
  if (m.kind == "synthetic") {
    if (!c.data.synthetic) {
      errors.push_back("model.kind: a synthetic model requires [data.synthetic] images");
    }
    if (set && !m.weights.empty() && m.weights.size() != set->regions.size()) {
      errors.push_back("model.weights: " + std::to_string(m.weights.size()) + " weights for " +
                       std::to_string(set->regions.size()) + " regions");
    }
    if (set && m.dim <= static_cast<int>(set->regions.size())) {
      errors.push_back("model.dim: must exceed the region count");
    }
  } else {
    need_file(m.onnx.model_path, "model.path");
    if (m.onnx.output_name.empty()) errors.push_back("model.output: required");
  }
  const bool has_activations = m.kind == "synthetic" ? m.activation_channels > 0
                                                     : m.onnx.activation_name.has_value();

  const auto& d = c.data;
  if (!d.synthetic) {
    if (extract) {
      need_file(d.calibration, "data.calibration");
      if (c.concepts.shap_value_fn == "pair" &&
          std::count(c.concepts.methods.begin(), c.concepts.methods.end(), Method::kKernelShap)) {
        need_file(d.calibration_pairs, "data.calibration_pairs");
      }
    }
    if (explain || evaluate) need_file(d.images, "data.images");
    const bool explicit_images = !c.explain.image_a.empty();
    if ((command == Command::kReport) ||
        (command == Command::kExplainPair && !explicit_images) ||
        (evaluate && c.evaluate.target == CurveTarget::kSimilarity)) {
      if (d.pairs.empty()) {
        errors.push_back(std::string("data.pairs: ") +
                         (evaluate && c.evaluate.target == CurveTarget::kSimilarity
                              ? "the similarity target needs a pair manifest"
                              : "required"));
      } else {
        need_file(d.pairs, "data.pairs");
      }
    }
  } else {
    const auto& sc = d.synthetic_config;
    if (sc.pairs == 0 && ((evaluate && c.evaluate.target == CurveTarget::kSimilarity) ||
                          command == Command::kReport)) {
      errors.push_back("data.synthetic.pairs: the similarity target needs pairs");
    }
  }

  const auto& k = c.concepts;
  if (extract && k.groups > 0) {
    if (k.representation != Representation::kActivations) {
      errors.push_back("concepts.groups: grouping needs representation = \"activations\"");
    }
    if (!has_activations) errors.push_back("concepts.groups: the model exposes no activations");
  }
  if (extract && k.representation == Representation::kActivations && !has_activations) {
    errors.push_back("concepts.representation: the model exposes no activations");
  }

  if (explain) {
    if (c.explain.ranking != "uniform") need_file(c.explain.ranking, "explain.ranking");
    if (command == Command::kExplainPair && c.explain.pair.empty() && c.explain.image_a.empty()) {
      errors.push_back("explain.pair: name a pair id or give image_a and image_b");
    }
  }
  if (evaluate) {
    for (std::size_t i = 0; i < c.evaluate.rankings.size(); ++i) {
      need_file(c.evaluate.rankings[i], "evaluate.rankings[" + std::to_string(i) + "]");
    }
    if (c.evaluate.oracle && m.kind != "synthetic") {
      errors.push_back("evaluate.oracle: only available for the synthetic model");
    }
    if (command == Command::kEvaluate && c.evaluate.rankings.empty() && !c.evaluate.oracle) {
      errors.push_back("evaluate.rankings: at least one ranking (or oracle = true) is required");
    }
  }
  if (explain && c.llm.enabled) {
    if (c.llm.endpoint.model.empty()) errors.push_back("llm.model: required when llm is enabled");
    if (c.llm.mode == LlmMode::kRecord && c.llm.fixtures.empty()) {
      errors.push_back("llm.fixtures: required for record mode");
    }
  }
  if (explain && !c.prompt.template_path.empty()) {
    need_file(c.prompt.template_path, "prompt.template");
  }
  return errors;
}

}  // namespace facexai::cli
