#include <unordered_map>

#include "coapids/error.hpp"
#include "coapids/eval.hpp"
#include "coapids/random.hpp"

namespace coapids::eval {

namespace {

ingest::DatasetTable subset(const ingest::DatasetTable& table, std::span<const std::size_t> rows) {
  ingest::DatasetTable out;
  out.columns = table.columns;
  out.rows.reserve(rows.size());
  for (std::size_t r : rows) out.rows.push_back(table.rows[r]);
  return out;
}

void require_labels(const preprocess::FeatureMatrix& m, std::size_t n_classes, const char* which) {
  if (m.labels.size() != m.values.rows()) throw Error(Errc::length_mismatch, std::string(which) + " labels/rows differ");
  for (int y : m.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes) {
      throw Error(Errc::unknown_class_label, std::string(which) + " set has a row without a known class");
    }
  }
}

}  // namespace

Experiment prepare_experiment(const ingest::DatasetTable& table, std::uint64_t seed, const ExperimentOptions& options) {
  table.validate();
  const std::size_t type_col = table.require_column(ingest::kTypeColumn);

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& label = table.rows[r][type_col];
    if (!label) throw Error(Errc::unknown_class_label, "row " + std::to_string(r) + " has no label");
    if (!options.scenario || *label == "normal" || *label == *options.scenario) keep.push_back(r);
  }
  const ingest::DatasetTable data = options.scenario ? subset(table, keep) : table;
  if (data.rows.empty()) throw Error(Errc::empty_table, "no rows to split");

  std::unordered_map<std::string, int> ids;
  std::vector<int> labels;
  labels.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    const auto [it, inserted] = ids.emplace(*row[type_col], static_cast<int>(ids.size()));
    labels.push_back(it->second);
  }

  const TrainTestSplit split = stratified_split(labels, options.test_fraction, seed);
  const ingest::DatasetTable train = subset(data, split.train);
  const ingest::DatasetTable test = subset(data, split.test);

  Experiment e;
  e.plan = preprocess::fit_plan(train, options.fit);
  e.train = preprocess::apply_plan(train, e.plan, true, options.exec);
  e.test = preprocess::apply_plan(test, e.plan, true, options.exec);
  e.classes = e.plan.label_classes;
  return e;
}

SweepReport sweep(const preprocess::FeatureMatrix& train, const preprocess::FeatureMatrix& test,
                  std::size_t n_classes, std::span<const std::size_t> dims, std::span<const Learner> classifiers,
                  std::uint64_t seed, const SweepOptions& options) {
  SweepReport report;
  if (dims.empty() || classifiers.empty()) return report;
  require_labels(train, n_classes, "training");
  require_labels(test, n_classes, "test");
  if (train.values.cols() != test.values.cols()) {
    throw Error(Errc::dimension_mismatch, "train and test have different feature counts");
  }
  const Exec exec = options.grid.exec;
  auto log = [&](const std::string& line) {
    if (options.log) options.log(line);
  };

  for (std::size_t dim : dims) {
    const std::string where = "dim " + std::to_string(dim);
    autoenc::AEConfig cfg = options.ae;
    cfg.input_dim = train.values.cols();
    cfg.latent_dim = dim;
    cfg.seed = derive_seed(seed, dim);
    Matrix z_train, z_test;
    try {
      log(where + ": training autoencoder");
      const auto trained = autoenc::train(train.values, cfg, {}, exec);
      log(where + ": final reconstruction loss " + std::to_string(trained.loss_history.empty() ? 0.0 : trained.loss_history.back()));
      z_train = autoenc::encode(trained.model, train.values, exec);
      z_test = autoenc::encode(trained.model, test.values, exec);
    } catch (const Error& e) {
      throw e.within(where + ", autoencoder");
    }

    for (Learner learner : classifiers) {
      const std::string who = where + ", " + std::string(learner_display(learner));
      try {
        const std::uint64_t work_seed = derive_seed(seed, (dim << 8) | (static_cast<std::uint64_t>(learner) + 1));
        const auto custom = options.grids.find(learner);
        const std::vector<trees::Params> grid = custom != options.grids.end() ? custom->second : default_grid(learner);
        log(who + ": grid search over " + std::to_string(grid.size()) + " points");
        const GridResult gr = grid_search(z_train, train.labels, n_classes, grid, work_seed, options.grid);
        log(who + ": best cv f1 " + std::to_string(gr.points[gr.best].mean_f1) + " with " +
            trees::params_to_json(gr.best_params()).dump());

        const std::vector<double> w = options.grid.class_weighting
                                          ? trees::compute_class_weights(train.labels).sample_weights(train.labels)
                                          : std::vector<double>(train.labels.size(), 1.0);
        const trees::Model model = trees::fit(z_train, train.labels, w, with_seed(gr.best_params(), work_seed), n_classes, exec);
        const auto pred = trees::predict(model, z_test, exec);
        const MetricsReport m = compute_metrics(test.labels, pred, n_classes);
        SweepRow row{dim, learner, m.precision, m.recall, m.f1, false};
        row.highlighted = row.precision >= kHighlightThreshold && row.recall >= kHighlightThreshold &&
                          row.f1 >= kHighlightThreshold;
        report.rows.push_back(row);
        log(who + ": test P " + std::to_string(m.precision) + " R " + std::to_string(m.recall) + " F1 " +
            std::to_string(m.f1));
      } catch (const Error& e) {
        throw e.within(who);
      }
    }
  }
  return report;
}

}  // namespace coapids::eval
