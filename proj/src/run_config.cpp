#include "coapids/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "coapids/error.hpp"

namespace coapids {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw UsageError("config key '" + std::string(key) + "': invalid value '" + std::string(value) + "'");
}

template <class T>
T parse_integer(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v);
}

}  // namespace

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(sep, start), text.size());
    const auto item = trim(text.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError("'" + item + "' is not a non-negative integer");
    }
    out.push_back(v);
  }
  return out;
}

void apply_config_text(RunConfig& c, std::string_view text, const std::filesystem::path& base_dir) {
  using Setter = std::function<void(std::string_view key, std::string_view value)>;
  auto path = [&](std::optional<std::filesystem::path>& dst) {
    return [&dst, &base_dir](std::string_view, std::string_view v) {
      std::filesystem::path p{std::string(v)};
      dst = p.is_absolute() ? p : base_dir / p;
    };
  };
  auto size = [](std::size_t& dst) { return [&dst](std::string_view k, std::string_view v) { dst = parse_integer<std::size_t>(k, v); }; };
  auto real = [](double& dst) { return [&dst](std::string_view k, std::string_view v) { dst = parse_real(k, v); }; };
  auto flag = [](bool& dst) { return [&dst](std::string_view k, std::string_view v) { dst = parse_bool(k, v); }; };
  auto text_of = [](std::string& dst) { return [&dst](std::string_view, std::string_view v) { dst = std::string(v); }; };

  const std::map<std::string, Setter, std::less<>> setters{
      {"seed", [&](std::string_view k, std::string_view v) { c.seed = parse_integer<std::uint64_t>(k, v); }},
      {"input", path(c.input)},
      {"output", path(c.output)},
      {"plan", path(c.plan)},
      {"model", path(c.model)},
      {"scenario.preset", text_of(c.scenario_preset)},
      {"scenario.duration_s", [&](std::string_view k, std::string_view v) { c.scenario_duration_s = parse_real(k, v); }},
      {"scenario.normal_rate_hz",
       [&](std::string_view k, std::string_view v) { c.scenario_normal_rate_hz = parse_real(k, v); }},
      {"scenario.windows", [&](std::string_view, std::string_view v) { c.scenario_windows = std::string(v); }},
      {"ingest.epoch_base", real(c.epoch_base)},
      {"preprocess.categorical", [&](std::string_view, std::string_view v) { c.categorical = split_list(v); }},
      {"ae.hidden",
       [&](std::string_view k, std::string_view v) {
         try {
           c.ae_hidden = parse_size_list(v);
         } catch (const UsageError&) {
           bad_value(k, v);
         }
       }},
      {"ae.latent_dim", size(c.ae_latent_dim)},
      {"ae.epochs", size(c.ae_epochs)},
      {"ae.batch_size", size(c.ae_batch_size)},
      {"ae.learning_rate", real(c.ae_learning_rate)},
      {"ae.output_activation", text_of(c.ae_output_activation)},
      {"trees.search", flag(c.trees_search)},
      {"trees.class_weighting", flag(c.class_weighting)},
      {"trees.dt.criterion", text_of(c.dt_criterion)},
      {"trees.dt.max_leaf_nodes", size(c.dt_max_leaf_nodes)},
      {"trees.rf.criterion", text_of(c.rf_criterion)},
      {"trees.rf.n_estimators", size(c.rf_n_estimators)},
      {"trees.rf.features_per_split", size(c.rf_features_per_split)},
      {"trees.xgb.n_estimators", size(c.xgb_n_estimators)},
      {"trees.xgb.max_depth", size(c.xgb_max_depth)},
      {"trees.xgb.learning_rate", real(c.xgb_learning_rate)},
      {"trees.xgb.lambda", real(c.xgb_lambda)},
      {"trees.xgb.min_child_weight", real(c.xgb_min_child_weight)},
      {"eval.dims",
       [&](std::string_view k, std::string_view v) {
         try {
           c.dims = parse_size_list(v);
         } catch (const UsageError&) {
           bad_value(k, v);
         }
       }},
      {"eval.classifiers", [&](std::string_view, std::string_view v) { c.classifiers = split_list(v); }},
      {"eval.k_folds", size(c.k_folds)},
      {"eval.test_fraction", real(c.test_fraction)},
      {"eval.scenario", [&](std::string_view, std::string_view v) { c.eval_scenario = std::string(v); }},
  };

  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw UsageError("config line " + std::to_string(number) + ": unknown key '" + std::string(key) + "'");
    if (!seen.emplace(key).second) {
      throw UsageError("config line " + std::to_string(number) + ": duplicate key '" + std::string(key) + "'");
    }
    it->second(key, value);
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig config;
  apply_config_text(config, buf.str(), path.parent_path());
  return config;
}

}  // namespace coapids
