#include "coapids/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "coapids/autoenc.hpp"
#include "coapids/error.hpp"
#include "coapids/eval.hpp"
#include "coapids/exec.hpp"
#include "coapids/ingest.hpp"
#include "coapids/preprocess.hpp"
#include "coapids/run_config.hpp"
#include "coapids/traffic_synth.hpp"
#include "coapids/trees.hpp"
#include "json_file.hpp"

namespace coapids::cli {

namespace fs = std::filesystem;

namespace {

// Values as given on the command line; empty means "not given".
struct Flags {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::string plan;
  std::string model;
  std::string dims;
  std::string classifiers;
  std::string preset;
  std::string windows;
  std::string input;
  std::string table_out;
  std::string means_out;
  std::string format = "table";
  int jobs = 0;
  bool strict_labels = false;
  bool fit = false;
};

class Context {
 public:
  Context(const Flags& flags, std::istream& in, std::ostream& out, std::ostream& err)
      : flags_(flags), in_(in), out_(out), err_(err) {
    if (!flags.config.empty()) config_ = load_run_config(flags.config);
    if (flags.seed) config_.seed = *flags.seed;
    if (!flags.input.empty()) config_.input = flags.input;
    if (!flags.out.empty()) config_.output = flags.out;
    if (!flags.plan.empty()) config_.plan = flags.plan;
    if (!flags.model.empty()) config_.model = flags.model;
    if (!flags.preset.empty()) config_.scenario_preset = flags.preset;
    if (!flags.dims.empty()) config_.dims = parse_size_list(flags.dims);
    if (!flags.classifiers.empty()) config_.classifiers = split_list(flags.classifiers);
    if (flags.jobs < 0) throw UsageError("--jobs must be positive");
    set_max_threads(flags.jobs);
    if (config_.input && config_.output && config_.input->string() != "-" && config_.output->string() != "-" &&
        fs::exists(*config_.input) && fs::exists(*config_.output) && fs::equivalent(*config_.input, *config_.output)) {
      throw UsageError("output would overwrite the input file");
    }
  }

  const RunConfig& config() const { return config_; }
  const Flags& flags() const { return flags_; }

  void log(const std::string& line) const { err_ << "coapids: " << line << '\n'; }

  ingest::DatasetTable read_table(bool strict_labels = false) const {
    if (!config_.input || config_.input->string() == "-") return ingest::parse_csv(in_, strict_labels);
    return ingest::read_csv(*config_.input, strict_labels);
  }

  void write_text(const std::string& text) const { write_to(config_.output, text); }

  void write_to(const std::optional<fs::path>& path, const std::string& text) const {
    if (!path || path->string() == "-") {
      out_ << text;
      out_.flush();
      return;
    }
    std::ofstream f(*path, std::ios::binary);
    if (!f) throw Error(Errc::io, "cannot write '" + path->string() + "'");
    f << text;
    if (!f) throw Error(Errc::io, "write failed for '" + path->string() + "'");
  }

  void write_table(const ingest::DatasetTable& table) const {
    std::ostringstream s;
    ingest::write_csv(table, s);
    write_text(s.str());
  }

  const fs::path& require(const std::optional<fs::path>& p, const char* flag) const {
    if (!p || p->empty()) throw UsageError(std::string("missing required ") + flag);
    return *p;
  }

 private:
  const Flags& flags_;
  RunConfig config_;
  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
};

std::vector<synth::AttackWindow> parse_windows(std::string_view text, bool with_rate) {
  std::vector<synth::AttackWindow> out;
  for (const auto& item : split_list(text, ';')) {
    const auto parts = split_list(item, ':');
    if (parts.size() != (with_rate ? 4u : 3u)) {
      throw UsageError("window '" + item + (with_rate ? "' is not kind:start:end:rate" : "' is not kind:start:end"));
    }
    const auto label = synth::parse_label(parts[0]);
    if (!label) throw UsageError("unknown window kind '" + parts[0] + "'");
    synth::AttackWindow w;
    w.kind = *label;
    try {
      w.start_s = std::stod(parts[1]);
      w.end_s = std::stod(parts[2]);
      if (with_rate) w.rate_hz = std::stod(parts[3]);
    } catch (const std::exception&) {
      throw UsageError("window '" + item + "' has a non-numeric field");
    }
    out.push_back(w);
  }
  return out;
}

std::vector<synth::LabeledFrame> synthesize_configured(const RunConfig& c) {
  const bool custom = c.scenario_duration_s || c.scenario_normal_rate_hz || c.scenario_windows;
  if (!custom) return synth::synthesize(synth::make_preset(c.scenario_preset, c.seed));
  synth::ScenarioConfig s;
  s.seed = c.seed;
  s.duration_s = c.scenario_duration_s.value_or(600.0);
  s.normal_rate_hz = c.scenario_normal_rate_hz.value_or(17.5);
  if (c.scenario_windows) s.attack_windows = parse_windows(*c.scenario_windows, true);
  return synth::synthesize(s);
}

autoenc::AEConfig ae_config(const RunConfig& c) {
  autoenc::AEConfig a;
  a.hidden_widths = c.ae_hidden;
  a.latent_dim = c.ae_latent_dim;
  a.epochs = c.ae_epochs;
  a.batch_size = c.ae_batch_size;
  a.learning_rate = c.ae_learning_rate;
  if (c.ae_output_activation == "relu") {
    a.output_activation = autoenc::Activation::relu;
  } else if (c.ae_output_activation == "linear") {
    a.output_activation = autoenc::Activation::linear;
  } else {
    throw UsageError("ae.output_activation must be relu or linear");
  }
  a.seed = c.seed;
  return a;
}

trees::Params fixed_params(const RunConfig& c, eval::Learner l) {
  switch (l) {
    case eval::Learner::dt: {
      trees::TreeParams p;
      p.criterion = trees::parse_criterion(c.dt_criterion);
      p.max_leaf_nodes = c.dt_max_leaf_nodes;
      return p;
    }
    case eval::Learner::rf: {
      trees::ForestParams p;
      p.criterion = trees::parse_criterion(c.rf_criterion);
      p.n_estimators = c.rf_n_estimators;
      p.features_per_split = c.rf_features_per_split;
      return p;
    }
    case eval::Learner::xgb: {
      trees::BoostParams p;
      p.n_estimators = c.xgb_n_estimators;
      p.max_depth = c.xgb_max_depth;
      p.learning_rate = c.xgb_learning_rate;
      p.l2_leaf_regularization = c.xgb_lambda;
      p.min_child_weight = c.xgb_min_child_weight;
      return p;
    }
  }
  throw UsageError("unknown classifier");
}

std::vector<eval::Learner> learners(const RunConfig& c) {
  std::vector<eval::Learner> out;
  for (const auto& name : c.classifiers) {
    try {
      out.push_back(eval::parse_learner(name));
    } catch (const Error& e) {
      throw UsageError(e.detail());
    }
  }
  return out;
}

preprocess::FitOptions fit_options(const RunConfig& c) {
  preprocess::FitOptions f;
  if (c.categorical) f.categorical = *c.categorical;
  return f;
}

preprocess::FeatureMatrix labeled_matrix(const preprocess::FeatureMatrix& m) {
  for (int y : m.labels) {
    if (y < 0) throw Error(Errc::unknown_class_label, "matrix has a row without a class label");
  }
  return m;
}

// Subcommands.

void cmd_synth(const Context& ctx) {
  const auto frames = synthesize_configured(ctx.config());
  ctx.log("synthesized " + std::to_string(frames.size()) + " frames");
  ctx.write_table(ingest::frames_to_table(frames));
}

void cmd_dissect(const Context& ctx) {
  const auto frames = ingest::frames_from_table(ctx.read_table());
  ingest::DatasetTable table = ingest::dissect_all(frames, ctx.config().epoch_base);
  if (!ctx.flags().windows.empty()) {
    std::vector<ingest::LabelWindow> windows;
    for (const auto& w : parse_windows(ctx.flags().windows, false)) {
      windows.push_back({std::string(synth::label_name(w.kind)), w.start_s, w.end_s});
    }
    ingest::label_by_window(table, windows);
  }
  ctx.log("dissected " + std::to_string(table.rows.size()) + " frames");
  ctx.write_table(table);
}

void cmd_preprocess(const Context& ctx) {
  const fs::path& plan_path = ctx.require(ctx.config().plan, "--plan");
  const ingest::DatasetTable table = ctx.read_table(ctx.flags().strict_labels);
  preprocess::EncodingPlan plan;
  if (ctx.flags().fit) {
    plan = preprocess::fit_plan(table, fit_options(ctx.config()));
    preprocess::save_plan(plan, plan_path);
    ctx.log("fitted plan: " + std::to_string(plan.feature_count()) + " features, " +
            std::to_string(plan.dropped_columns.size()) + " columns dropped");
  } else {
    plan = preprocess::load_plan(plan_path);
  }
  const auto m = preprocess::apply_plan(table, plan, ctx.flags().strict_labels);
  ctx.write_table(preprocess::matrix_to_table(m, plan.label_classes));
}

void cmd_train_ae(const Context& ctx) {
  std::vector<std::string> classes;
  const auto m = preprocess::matrix_from_table(ctx.read_table(), classes);
  autoenc::AEConfig cfg = ae_config(ctx.config());
  if (!ctx.flags().dims.empty()) {
    if (ctx.config().dims.size() != 1) throw UsageError("train-ae takes a single --dims value");
    cfg.latent_dim = ctx.config().dims.front();
  }
  cfg.input_dim = m.values.cols();
  const auto result = autoenc::train(m.values, cfg, [&](std::size_t epoch, double loss) {
    ctx.log("epoch " + std::to_string(epoch + 1) + "/" + std::to_string(cfg.epochs) + " loss " + std::to_string(loss));
  });
  ctx.write_text(autoenc::to_json(result.model).dump(1) + "\n");
}

void cmd_encode(const Context& ctx) {
  const auto model = autoenc::load_model(ctx.require(ctx.config().model, "--model"));
  std::vector<std::string> classes;
  const auto m = preprocess::matrix_from_table(ctx.read_table(), classes);
  preprocess::FeatureMatrix z;
  z.values = autoenc::encode(model, m.values);
  z.labels = m.labels;
  for (std::size_t i = 0; i < z.values.cols(); ++i) z.column_names.push_back("z" + std::to_string(i + 1));
  ctx.write_table(preprocess::matrix_to_table(z, classes));
}

void cmd_train_clf(const Context& ctx) {
  const RunConfig& c = ctx.config();
  const auto ls = learners(c);
  if (ls.size() != 1) throw UsageError("train-clf takes exactly one --classifiers value");
  std::vector<std::string> classes;
  const auto m = labeled_matrix(preprocess::matrix_from_table(ctx.read_table(), classes));

  trees::Params params = fixed_params(c, ls.front());
  if (c.trees_search) {
    const auto grid = eval::default_grid(ls.front());
    eval::GridOptions opt;
    opt.k_folds = c.k_folds;
    opt.class_weighting = c.class_weighting;
    const auto gr = eval::grid_search(m.values, m.labels, classes.size(), grid, c.seed, opt);
    for (const auto& p : gr.points) {
      ctx.log("cv f1 " + std::to_string(p.mean_f1) + " " + trees::params_to_json(p.params).dump());
    }
    params = gr.best_params();
  }
  params = eval::with_seed(params, c.seed);
  const auto w = c.class_weighting ? trees::compute_class_weights(m.labels).sample_weights(m.labels)
                                   : std::vector<double>(m.labels.size(), 1.0);
  const trees::Model model = trees::fit(m.values, m.labels, w, params, classes.size());
  nlohmann::json j = trees::to_json(model);
  j["classes"] = classes;
  j["params"] = trees::params_to_json(params);
  ctx.log("trained " + std::string(trees::learner_name(model)) + " with " + j["params"].dump());
  ctx.write_text(j.dump(1) + "\n");
}

void cmd_evaluate(const Context& ctx) {
  const nlohmann::json j = coapids::detail::read_json_file(ctx.require(ctx.config().model, "--model"));
  const trees::Model model = trees::model_from_json(j);
  std::vector<std::string> classes;
  if (j.contains("classes")) classes = j.at("classes").get<std::vector<std::string>>();
  const auto m = labeled_matrix(preprocess::matrix_from_table(ctx.read_table(), classes));
  const auto pred = trees::predict(model, m.values);
  const auto r = eval::compute_metrics(m.labels, pred, classes.size());

  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  std::string out = "class,precision,recall,f1,support\n";
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& pc = r.per_class[c];
    out += classes[c] + ',' + fmt(pc.precision) + ',' + fmt(pc.recall) + ',' + fmt(pc.f1) + ',' +
           std::to_string(pc.support) + '\n';
  }
  out += "weighted," + fmt(r.precision) + ',' + fmt(r.recall) + ',' + fmt(r.f1) + ',' + std::to_string(pred.size()) + '\n';
  ctx.write_text(out);
}

void cmd_sweep(const Context& ctx) {
  const RunConfig& c = ctx.config();
  ingest::DatasetTable table;
  if (c.input) {
    table = ctx.read_table(ctx.flags().strict_labels);
  } else {
    ctx.log("no input given; synthesizing scenario '" + c.scenario_preset + "'");
    table = ingest::dissect_all(synthesize_configured(c), c.epoch_base);
  }
  eval::ExperimentOptions eo;
  eo.test_fraction = c.test_fraction;
  eo.fit = fit_options(c);
  eo.scenario = c.eval_scenario;
  const eval::Experiment e = eval::prepare_experiment(table, c.seed, eo);
  ctx.log("train " + std::to_string(e.train.values.rows()) + " rows, test " + std::to_string(e.test.values.rows()) +
          " rows, " + std::to_string(e.plan.feature_count()) + " features");
  if (c.plan) preprocess::save_plan(e.plan, *c.plan);

  eval::SweepOptions so;
  so.ae = ae_config(c);
  so.grid.k_folds = c.k_folds;
  so.grid.class_weighting = c.class_weighting;
  if (!c.trees_search) {
    for (eval::Learner l : {eval::Learner::dt, eval::Learner::rf, eval::Learner::xgb}) so.grids[l] = {fixed_params(c, l)};
  }
  so.log = [&](const std::string& line) { ctx.log(line); };
  const auto ls = learners(c);
  const auto report = eval::sweep(e.train, e.test, e.classes.size(), c.dims, ls, c.seed, so);
  ctx.write_text(eval::report_csv(report));
  if (!ctx.flags().table_out.empty()) ctx.write_to(fs::path(ctx.flags().table_out), eval::report_table(report));
  if (!ctx.flags().means_out.empty()) ctx.write_to(fs::path(ctx.flags().means_out), eval::report_means_csv(report));
}

void cmd_report(const Context& ctx) {
  std::ostringstream raw;
  ingest::write_csv(ctx.read_table(), raw);
  const auto report = eval::parse_report_csv(raw.str());
  const std::string& f = ctx.flags().format;
  if (f == "table") {
    ctx.write_text(eval::report_table(report));
  } else if (f == "means") {
    ctx.write_text(eval::report_means_csv(report));
  } else if (f == "csv") {
    ctx.write_text(eval::report_csv(report));
  } else {
    throw UsageError("--format must be table, means or csv");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"CoAP intrusion detection pipeline: traffic synthesis, dissection, preprocessing, autoencoder "
               "feature reduction and tree classifiers"};
  app.name("coapids");
  app.require_subcommand(1);
  Flags flags;

  auto common = [&](CLI::App* sub, bool with_input) {
    sub->add_option("--seed", flags.seed, "Master seed for all randomness");
    sub->add_option("--config", flags.config, "Run configuration file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", flags.out, "Output path ('-' for standard output)");
    sub->add_option("--jobs", flags.jobs, "Maximum worker threads");
    if (with_input) sub->add_option("input", flags.input, "Input CSV ('-' or omitted for standard input)");
  };

  auto* synth = app.add_subcommand("synth", "Generate a labeled frame log from a scenario");
  common(synth, false);
  synth->add_option("--preset", flags.preset, "Scenario preset")->check(CLI::IsMember(synth::preset_names()));

  auto* dissect = app.add_subcommand("dissect", "Decode a frame log into the per-frame field table");
  common(dissect, true);
  dissect->add_option("--windows", flags.windows, "Relabel by time windows: kind:start:end[;...]");

  auto* prep = app.add_subcommand("preprocess", "Encode and scale a field table into a feature matrix");
  common(prep, true);
  prep->add_option("--plan", flags.plan, "Encoding plan file (written with --fit, read otherwise)");
  prep->add_flag("--fit", flags.fit, "Fit the plan on this input before applying it");
  prep->add_flag("--strict-labels", flags.strict_labels, "Reject unknown or missing class labels");

  auto* train_ae = app.add_subcommand("train-ae", "Train the autoencoder on a feature matrix");
  common(train_ae, true);
  train_ae->add_option("--dims", flags.dims, "Latent size");

  auto* encode = app.add_subcommand("encode", "Project a feature matrix onto the latent space");
  common(encode, true);
  encode->add_option("--model", flags.model, "Autoencoder model file");

  auto* train_clf = app.add_subcommand("train-clf", "Grid-search and train one classifier");
  common(train_clf, true);
  train_clf->add_option("--classifiers", flags.classifiers, "dt, rf or xgb");

  auto* evaluate = app.add_subcommand("evaluate", "Score a classifier on a labeled matrix");
  common(evaluate, true);
  evaluate->add_option("--model", flags.model, "Classifier model file");

  auto* sweep = app.add_subcommand("sweep", "Latent-size sweep over classifiers");
  common(sweep, true);
  sweep->add_option("--dims", flags.dims, "Comma list of latent sizes");
  sweep->add_option("--classifiers", flags.classifiers, "Comma list of dt, rf, xgb");
  sweep->add_option("--preset", flags.preset, "Scenario to synthesize when no input is given")
      ->check(CLI::IsMember(synth::preset_names()));
  sweep->add_option("--plan", flags.plan, "Also write the fitted encoding plan here");
  sweep->add_option("--table", flags.table_out, "Also write the monospace table here");
  sweep->add_option("--means", flags.means_out, "Also write per-dim means here");
  sweep->add_flag("--strict-labels", flags.strict_labels, "Reject unknown or missing class labels");

  auto* report = app.add_subcommand("report", "Render a sweep report");
  common(report, true);
  report->add_option("--format", flags.format, "table, means or csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const Context ctx(flags, in, out, err);
    if (*synth) cmd_synth(ctx);
    if (*dissect) cmd_dissect(ctx);
    if (*prep) cmd_preprocess(ctx);
    if (*train_ae) cmd_train_ae(ctx);
    if (*encode) cmd_encode(ctx);
    if (*train_clf) cmd_train_clf(ctx);
    if (*evaluate) cmd_evaluate(ctx);
    if (*sweep) cmd_sweep(ctx);
    if (*report) cmd_report(ctx);
    return 0;
  } catch (const UsageError& e) {
    err << "coapids: usage: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const Error& e) {
    err << "coapids: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "coapids: error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace coapids::cli
