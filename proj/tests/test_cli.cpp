#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "coapids/cli.hpp"
#include "coapids/ingest.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& input = {}) {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = coapids::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("coapids_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kSmallConfig =
    "scenario.duration_s = 120\n"
    "scenario.normal_rate_hz = 4\n"
    "scenario.windows = dos:10:40:3;mitm:50:80:2;crossproto:90:115:3\n"
    "ae.hidden = 8\n"
    "ae.epochs = 3\n"
    "eval.k_folds = 3\n"
    "trees.rf.n_estimators = 10\n";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2") {
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"synth", "--preset", "nope"}).code == 2);
    CHECK(run({"sweep", "--dims", "x"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({}).code == 2);
  }

  TEST_CASE("data errors exit 1") {
    const Run r = run({"dissect", "-"}, "a,b\n1\n");
    CHECK(r.code == 1);
    CHECK(r.err.find("coapids: ") != std::string::npos);
  }

  TEST_CASE("synth | dissect | preprocess pipeline") {
    TempDir tmp;
    const Run synth = run({"synth", "--preset", "dos-scenario", "--seed", "1"});
    REQUIRE(synth.code == 0);
    const Run dissect = run({"dissect", "-"}, synth.out);
    REQUIRE(dissect.code == 0);
    const fs::path plan = tmp.path / "plan.json";
    const Run prep = run({"preprocess", "--fit", "--plan", plan.string(), "-"}, dissect.out);
    REQUIRE(prep.code == 0);
    CHECK(fs::exists(plan));
    std::istringstream csv(prep.out);
    const auto table = coapids::ingest::parse_csv(csv, true);
    CHECK(table.columns.back() == "type");
    CHECK(table.rows.size() > 20000);
    bool saw_dos = false;
    for (const auto& row : table.rows) saw_dos |= row.back() == "dos";
    CHECK(saw_dos);

    const Run again = run({"preprocess", "--plan", plan.string(), "-"}, dissect.out);
    REQUIRE(again.code == 0);
    CHECK(again.out == prep.out);
  }

  TEST_CASE("stage by stage: train-ae, encode, train-clf, evaluate") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "run.conf";
    std::ofstream(cfg) << kSmallConfig;
    const Run synth = run({"synth", "--config", cfg.string(), "--seed", "2"});
    REQUIRE(synth.code == 0);
    const Run dissect = run({"dissect", "-"}, synth.out);
    REQUIRE(dissect.code == 0);
    const fs::path plan = tmp.path / "plan.json";
    const Run prep = run({"preprocess", "--fit", "--plan", plan.string(), "-"}, dissect.out);
    REQUIRE(prep.code == 0);
    const fs::path matrix = tmp.path / "matrix.csv";
    std::ofstream(matrix) << prep.out;

    const fs::path ae = tmp.path / "ae.json";
    REQUIRE(run({"train-ae", "--config", cfg.string(), "--dims", "2", "-o", ae.string(), matrix.string()}).code == 0);
    const Run enc = run({"encode", "--model", ae.string(), matrix.string()});
    REQUIRE(enc.code == 0);
    CHECK(enc.out.starts_with("z1,z2,type\n"));
    const fs::path latent = tmp.path / "latent.csv";
    std::ofstream(latent) << enc.out;

    const fs::path clf = tmp.path / "clf.json";
    REQUIRE(run({"train-clf", "--config", cfg.string(), "--classifiers", "rf", "-o", clf.string(), latent.string()}).code == 0);
    const Run ev = run({"evaluate", "--model", clf.string(), latent.string()});
    REQUIRE(ev.code == 0);
    CHECK(ev.out.starts_with("class,precision,recall,f1,support\n"));
    CHECK(ev.out.find("weighted,") != std::string::npos);

    CHECK(run({"train-ae", "-o", matrix.string(), matrix.string()}).code == 2);
  }

  TEST_CASE("sweep twice gives byte-identical reports") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "run.conf";
    std::ofstream(cfg) << kSmallConfig;
    const fs::path a = tmp.path / "a.csv", b = tmp.path / "b.csv", table = tmp.path / "t.txt";
    const std::vector<std::string> common{"sweep", "--config", cfg.string(), "--dims", "1,2", "--classifiers", "dt,rf,xgb",
                                          "--seed", "7"};
    auto with = [&](std::vector<std::string> extra) {
      auto args = common;
      args.insert(args.end(), extra.begin(), extra.end());
      return args;
    };
    REQUIRE(run(with({"-o", a.string(), "--table", table.string()})).code == 0);
    REQUIRE(run(with({"-o", b.string()})).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).starts_with("dim,classifier,precision,recall,f1,highlighted\n1,DT,"));
    CHECK(fs::file_size(table) > 0);

    const Run rep = run({"report", "--format", "means", a.string()});
    REQUIRE(rep.code == 0);
    CHECK(rep.out.starts_with("dim,precision,recall,f1\n"));
  }
}
