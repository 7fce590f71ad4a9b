#include <doctest.h>

#include "coapids/error.hpp"
#include "coapids/run_config.hpp"

using namespace coapids;

TEST_SUITE("run_config") {
  TEST_CASE("keys, comments and relative paths") {
    RunConfig c;
    apply_config_text(c,
                      "# a comment\n"
                      "seed = 42\n"
                      "input = data/frames.csv   # trailing\n"
                      "output = /tmp/out.csv\n"
                      "\n"
                      "ae.hidden = 16, 8\n"
                      "trees.search = off\n"
                      "trees.xgb.learning_rate = 0.1\n"
                      "eval.dims = 1,2,3\n"
                      "eval.classifiers = rf, xgb\n"
                      "scenario.windows = dos:1:2:3\n",
                      "/base");
    CHECK(c.seed == 42);
    CHECK(c.input == std::filesystem::path("/base/data/frames.csv"));
    CHECK(c.output == std::filesystem::path("/tmp/out.csv"));
    CHECK(c.ae_hidden == std::vector<std::size_t>{16, 8});
    CHECK_FALSE(c.trees_search);
    CHECK(c.xgb_learning_rate == 0.1);
    CHECK(c.dims == std::vector<std::size_t>{1, 2, 3});
    CHECK(c.classifiers == std::vector<std::string>{"rf", "xgb"});
    CHECK(c.scenario_windows == "dos:1:2:3");
  }

  TEST_CASE("errors") {
    RunConfig c;
    CHECK_THROWS_AS(apply_config_text(c, "nope = 1\n", "."), UsageError);
    CHECK_THROWS_AS(apply_config_text(c, "seed = 1\nseed = 2\n", "."), UsageError);
    CHECK_THROWS_AS(apply_config_text(c, "seed = x\n", "."), UsageError);
    CHECK_THROWS_AS(apply_config_text(c, "seed\n", "."), UsageError);
    CHECK_THROWS_AS(apply_config_text(c, "eval.dims = 1,a\n", "."), UsageError);
    CHECK_THROWS_AS(apply_config_text(c, "trees.search = maybe\n", "."), UsageError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.txt"), UsageError);
  }

  TEST_CASE("list helpers") {
    CHECK(split_list(" a, b ,,c ") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_list("x;y", ';') == std::vector<std::string>{"x", "y"});
    CHECK(parse_size_list("4, 8") == std::vector<std::size_t>{4, 8});
    CHECK_THROWS_AS(parse_size_list("-1"), UsageError);
  }
}
