#include <doctest.h>

#include <cmath>

#include "coapids/error.hpp"
#include "coapids/eval.hpp"
#include "oracles/gen.hpp"
#include "oracles/metrics_oracle.hpp"

using namespace coapids;
using namespace coapids::eval;

namespace {

preprocess::FeatureMatrix blob_features(Rng& rng, std::size_t n, std::size_t d, std::size_t k) {
  preprocess::FeatureMatrix m;
  m.values = Matrix(n, d);
  m.labels = gen::covering_labels(rng, n, k, 10);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < d; ++f) {
      const double centre = static_cast<double>((m.labels[r] * 3 + static_cast<int>(f)) % 5) / 5.0;
      m.values(r, f) = std::clamp(centre + rng.uniform(-0.15, 0.15), 0.0, 1.0);
    }
  }
  for (std::size_t f = 0; f < d; ++f) m.column_names.push_back("f" + std::to_string(f));
  return m;
}

// Re-runs every grid point on its own: fits exactly the requested params on
// each fold and averages the oracle's weighted F1.
std::vector<double> exhaustive_scores(const Matrix& x, const std::vector<int>& y, std::size_t k,
                                      const std::vector<trees::Params>& grid, std::uint64_t seed, std::size_t folds) {
  const auto fold = stratified_folds(y, folds, seed);
  std::vector<double> out;
  for (const auto& p : grid) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> tr, te;
      for (std::size_t r = 0; r < y.size(); ++r) (fold[r] == static_cast<int>(f) ? te : tr).push_back(r);
      std::vector<int> ytr, yte;
      for (auto r : tr) ytr.push_back(y[r]);
      for (auto r : te) yte.push_back(y[r]);
      const auto w = trees::compute_class_weights(ytr).sample_weights(ytr);
      const auto model = trees::fit(x.gather_rows(tr), ytr, w, with_seed(p, seed ^ f), k, Exec::serial);
      const auto pred = trees::predict(model, x.gather_rows(te), Exec::serial);
      sum += oracle::metrics(yte, pred, k).w_f1;
    }
    out.push_back(sum / static_cast<double>(folds));
  }
  return out;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("hand example") {
    const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 1, 1};
    const MetricsReport m = compute_metrics(t, p, 2);
    CHECK(m.per_class[0].precision == 1.0);
    CHECK(m.per_class[0].recall == 0.5);
    CHECK(m.per_class[0].f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.per_class[1].precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.per_class[1].recall == 1.0);
    CHECK(m.per_class[1].f1 == doctest::Approx(0.8));
    CHECK(m.precision == doctest::Approx(0.8333333333));
    CHECK(m.recall == 0.75);
    CHECK(std::abs(m.f1 - 11.0 / 15.0) < 1e-9);
    CHECK(m.confusion.at(0, 1) == 1);
    CHECK(m.confusion.total() == 4);
  }

  TEST_CASE("perfect prediction and empty predicted class") {
    const std::vector<int> t{0, 1, 2, 2};
    const MetricsReport m = compute_metrics(t, t, 3);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    const MetricsReport z = compute_metrics(t, std::vector<int>{0, 0, 2, 2}, 3);
    CHECK(z.per_class[1].precision == 0.0);
    CHECK(z.per_class[1].f1 == 0.0);
    CHECK_THROWS_AS(compute_metrics(t, std::vector<int>{0}, 3), Error);
    CHECK_THROWS_AS(compute_metrics(t, std::vector<int>{0, 0, 0, 3}, 3), Error);
  }

  TEST_CASE("metrics match the pairwise oracle") {
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
      const std::size_t k = 2 + rng.below(5), n = 1 + rng.below(80);
      const auto t = gen::labels(rng, n, k), p = gen::labels(rng, n, k);
      const MetricsReport m = compute_metrics(t, p, k);
      const auto o = oracle::metrics(t, p, k);
      for (std::size_t c = 0; c < k; ++c) {
        REQUIRE(m.per_class[c].precision == o.precision[c]);
        REQUIRE(m.per_class[c].recall == o.recall[c]);
        REQUIRE(m.per_class[c].f1 == o.f1[c]);
        REQUIRE(m.per_class[c].support == o.support[c]);
      }
      REQUIRE(std::abs(m.precision - o.w_precision) < 1e-12);
      REQUIRE(std::abs(m.recall - o.w_recall) < 1e-12);
      REQUIRE(std::abs(m.f1 - o.w_f1) < 1e-12);
    }
  }

  TEST_CASE("equal supports make weighted equal macro") {
    Rng rng(32);
    std::vector<int> t;
    for (int c = 0; c < 3; ++c) t.insert(t.end(), 10, c);
    const auto p = gen::labels(rng, t.size(), 3);
    const MetricsReport m = compute_metrics(t, p, 3);
    double macro = 0.0;
    for (const auto& c : m.per_class) macro += c.f1 / 3.0;
    CHECK(m.f1 == doctest::Approx(macro).epsilon(1e-12));
  }

  TEST_CASE("stratified folds are balanced and seeded") {
    Rng rng(33);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t k = 2 + rng.below(5);
      const auto y = gen::covering_labels(rng, 30 + rng.below(200), 1 + rng.below(4), k);
      const auto folds = stratified_folds(y, k, trial);
      REQUIRE(folds == stratified_folds(y, k, trial));
      std::vector<std::size_t> size(k, 0);
      for (int f : folds) ++size[static_cast<std::size_t>(f)];
      REQUIRE(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()) <= 1);
      for (int cls = 0; cls <= *std::max_element(y.begin(), y.end()); ++cls) {
        std::vector<std::size_t> per(k, 0);
        for (std::size_t r = 0; r < y.size(); ++r) per[static_cast<std::size_t>(folds[r])] += y[r] == cls;
        REQUIRE(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()) <= 1);
      }
    }
    CHECK_THROWS_AS(stratified_folds(std::vector<int>{0, 0, 0, 1}, 2, 1), Error);
  }

  TEST_CASE("stratified split") {
    std::vector<int> y(100, 0);
    for (std::size_t i = 0; i < 30; ++i) y[i] = 1;
    const auto s = stratified_split(y, 0.2, 4);
    CHECK(s.test.size() == 20);
    CHECK(s.train.size() == 80);
    CHECK(std::is_sorted(s.test.begin(), s.test.end()));
    std::size_t ones = 0;
    for (auto r : s.test) ones += y[r] == 1;
    CHECK(ones == 6);
  }

  TEST_CASE("learner names") {
    CHECK(parse_learner("RF") == Learner::rf);
    CHECK(learner_display(Learner::xgb) == "XGB");
    CHECK(parse_learner_list("dt, xgb") == std::vector<Learner>{Learner::dt, Learner::xgb});
    CHECK_THROWS_AS(parse_learner("svm"), Error);
  }

  TEST_CASE("grid search agrees with exhaustive re-evaluation") {
    Rng rng(34);
    for (int trial = 0; trial < 3; ++trial) {
      const auto fm = blob_features(rng, 120, 2, 3);
      std::vector<int> y = fm.labels;
      for (int& v : y) {
        if (rng.below(6) == 0) v = static_cast<int>(rng.below(3));
      }
      for (int cls = 0; cls < 3; ++cls) y[static_cast<std::size_t>(cls)] = cls;

      std::vector<trees::Params> dt;
      for (std::size_t leaves : {2, 3, 6}) {
        for (auto c : {trees::Criterion::gini, trees::Criterion::entropy}) {
          trees::TreeParams p;
          p.max_leaf_nodes = leaves;
          p.criterion = c;
          dt.emplace_back(p);
        }
      }
      std::vector<trees::Params> rf;
      for (std::size_t n : {2, 5}) {
        trees::ForestParams p;
        p.n_estimators = n;
        rf.emplace_back(p);
      }
      std::vector<trees::Params> xgb;
      for (std::size_t n : {1, 4}) {
        for (std::size_t depth : {1, 3}) {
          trees::BoostParams p;
          p.n_estimators = n;
          p.max_depth = depth;
          xgb.emplace_back(p);
        }
      }
      for (const auto& grid : {dt, rf, xgb}) {
        const GridResult g = grid_search(fm.values, y, 3, grid, 50 + trial, {3, true, Exec::parallel});
        const auto scores = exhaustive_scores(fm.values, y, 3, grid, 50 + trial, 3);
        for (std::size_t i = 0; i < grid.size(); ++i) REQUIRE(std::abs(g.points[i].mean_f1 - scores[i]) < 1e-12);
        const double top = *std::max_element(scores.begin(), scores.end());
        CHECK(scores[g.best] >= top - 1e-12);
        for (std::size_t i = 0; i < g.best; ++i) CHECK(g.points[i].mean_f1 < g.points[g.best].mean_f1);
        const GridResult serial = grid_search(fm.values, y, 3, grid, 50 + trial, {3, true, Exec::serial});
        CHECK(serial.best == g.best);
      }
    }
  }

  TEST_CASE("one-point grid and errors") {
    Rng rng(35);
    const auto fm = blob_features(rng, 60, 2, 2);
    const std::vector<trees::Params> one{trees::TreeParams{}};
    CHECK(grid_search(fm.values, fm.labels, 2, one, 1).best == 0);
    CHECK_THROWS_AS(grid_search(fm.values, fm.labels, 2, std::vector<trees::Params>{}, 1), Error);
    trees::TreeParams bad;
    bad.max_leaf_nodes = 0;
    CHECK_THROWS_AS(grid_search(fm.values, fm.labels, 2, std::vector<trees::Params>{bad}, 1), Error);
  }

  TEST_CASE("default grids") {
    CHECK(default_grid(Learner::dt).size() == 10);
    CHECK(default_grid(Learner::rf).size() == 6);
    CHECK(default_grid(Learner::xgb).size() == 9);
  }

  TEST_CASE("sweep on a small corpus") {
    Rng rng(36);
    const auto train = blob_features(rng, 150, 5, 3);
    const auto test = blob_features(rng, 60, 5, 3);
    SweepOptions opt;
    opt.ae.hidden_widths = {4};
    opt.ae.epochs = 5;
    opt.grid.k_folds = 3;
    trees::ForestParams fp;
    fp.n_estimators = 5;
    trees::BoostParams bp;
    bp.n_estimators = 5;
    opt.grids[Learner::rf] = {fp};
    opt.grids[Learner::xgb] = {bp};
    const std::vector<std::size_t> dims{1, 2};
    const std::vector<Learner> learners{Learner::dt, Learner::rf, Learner::xgb};

    CHECK(sweep(train, test, 3, std::vector<std::size_t>{}, learners, 1, opt).rows.empty());

    const SweepReport a = sweep(train, test, 3, dims, learners, 1, opt);
    REQUIRE(a.rows.size() == 6);
    CHECK(a.rows[0].dim == 1);
    CHECK(a.rows[3].classifier == Learner::dt);
    for (const auto& r : a.rows) {
      CHECK(r.highlighted == (r.precision >= 0.99 && r.recall >= 0.99 && r.f1 >= 0.99));
    }
    const SweepReport b = sweep(train, test, 3, dims, learners, 1, opt);
    CHECK(report_csv(a) == report_csv(b));
  }

  TEST_CASE("report formats") {
    SweepReport r;
    r.rows = {{1, Learner::dt, 0.5, 0.25, 0.125, false}, {1, Learner::rf, 0.995, 0.999, 0.997, true},
              {2, Learner::dt, 1.0, 1.0, 1.0, true}, {2, Learner::rf, 0.75, 0.5, 0.6, false}};
    const std::string csv = report_csv(r);
    CHECK(csv.starts_with("dim,classifier,precision,recall,f1,highlighted\n1,DT,0.500000,0.250000,0.125000,0\n"));
    CHECK(parse_report_csv(csv) == r);
    const std::string table = report_table(r);
    CHECK(table.find("0.9950*") != std::string::npos);
    CHECK(table.find("0.5000*") == std::string::npos);
    const std::string means = report_means_csv(r);
    CHECK(means.starts_with("dim,precision,recall,f1\n1,"));
    CHECK_THROWS_AS(parse_report_csv("a,b\n1,2\n"), Error);
  }
}
