#include <sstream>

#include "doctest.h"
#include "mchjm/fixture.hpp"
#include "mchjm/io.hpp"

using namespace mchjm;
using Eigen::MatrixXd;

namespace {

RunConfig toy_config() {
  RunConfig cfg;
  cfg.curves = {CurveConfig{"OIS", "0", {"1m", "6m", "1y"}, {}}};
  return cfg;
}

const char* kToy =
    "date,curve_id,tenor_label,yield\n"
    "2012-01-03,OIS,1m,0.0101\n"
    "2012-01-03,OIS,6m,0.0122\n"
    "2012-01-03,OIS,1y,0.0135\n"
    "2012-01-10,OIS,1m,-0.0005\n"
    "2012-01-10,OIS,6m,0.011\n"
    "2012-01-10,OIS,1y,0.0141\n";

std::string error_of(const std::string& text, const RunConfig& cfg) {
  std::istringstream in(text);
  try {
    (void)load_history(in, cfg);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("history round trip") {
  std::istringstream in(kToy);
  const auto h = load_history(in, toy_config());
  REQUIRE(h.size() == 1);
  CHECK(h[0].size() == 2);
  CHECK(h[0].values()(1, 0) == -0.0005);
  CHECK(h[0].grid().label(2) == "1y");
  std::ostringstream out;
  save_history(out, h);
  CHECK(out.str() == kToy);

  // Header-less input and shuffled row order load the same panel.
  const std::string shuffled =
      "2012-01-03,OIS,1y,0.0135\n2012-01-03,OIS,1m,0.0101\n2012-01-03,OIS,6m,0.0122\n"
      "2012-01-10,OIS,6m,0.011\n2012-01-10,OIS,1m,-0.0005\n2012-01-10,OIS,1y,0.0141\n";
  std::istringstream in2(shuffled);
  CHECK(load_history(in2, toy_config())[0].values() == h[0].values());
}

TEST_CASE("history errors name the offending cell") {
  const RunConfig cfg = toy_config();
  std::string gap = kToy;
  gap.erase(gap.find("2012-01-10,OIS,6m,0.011\n"), std::string("2012-01-10,OIS,6m,0.011\n").size());
  const std::string e1 = error_of(gap, cfg);
  CHECK(e1.find("6m") != std::string::npos);
  CHECK(e1.find("2012-01-10") != std::string::npos);

  const std::string dup = std::string(kToy) + "2012-01-10,OIS,1y,0.0141\n";
  CHECK(error_of(dup, cfg).find("duplicate") != std::string::npos);
  CHECK(error_of(dup, cfg).find("row 8") != std::string::npos);

  const std::string back = std::string(kToy) + "2012-01-05,OIS,1m,0.01\n";
  CHECK(error_of(back, cfg).find("increasing") != std::string::npos);

  const std::string label = std::string(kToy) + "2012-01-17,OIS,3q,0.01\n";
  CHECK(error_of(label, cfg).find("3q") != std::string::npos);

  const std::string value = std::string(kToy) + "2012-01-17,OIS,1m,abc\n";
  CHECK(error_of(value, cfg).find("row 8") != std::string::npos);

  const std::string date = std::string(kToy) + "2012-13-17,OIS,1m,0.01\n";
  CHECK(error_of(date, cfg).find("row 8") != std::string::npos);

  CHECK_FALSE(error_of("date,curve_id,tenor_label,yield\n", cfg).empty());
}

TEST_CASE("config defaults and json") {
  const RunConfig d = RunConfig::defaults();
  CHECK(d.short_buckets == 2);
  CHECK(d.pca_threshold == 0.95);
  CHECK(d.horizons == std::vector<int>{1, 12, 52});
  CHECK(d.coverage == std::vector<double>{0.95, 0.99});
  CHECK(d.n_boot == 500);
  CHECK(d.tol == 1e-4);
  CHECK(d.window == 156);
  REQUIRE(d.curves.size() == 2);
  CHECK(d.curves[0].buckets.size() == 12);
  CHECK(d.curves[1].tenor_years() == doctest::Approx(0.25));

  const CurveSystem sys = make_system(d);
  CHECK(sys.grid(0).back() == 30.0);
  CHECK(sys.grid(0).front() == doctest::Approx(1.0 / 12));

  const std::string js = config_to_json(d);
  const RunConfig back = config_from_json(js);
  CHECK(config_to_json(back) == js);

  const RunConfig partial = config_from_json(R"({"window": 52, "seed": 9, "horizons": [1, 4]})");
  CHECK(partial.window == 52);
  CHECK(partial.seed == 9);
  CHECK(partial.horizons == std::vector<int>{1, 4});
  CHECK(partial.curves.size() == 2);

  CHECK_THROWS_AS(config_from_json(R"({"windw": 52})"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(R"({"coverage": [1.5]})"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(R"({"drift_mode": "sideways"})"), std::invalid_argument);
}

TEST_CASE("states from yield histories") {
  RunConfig cfg = RunConfig::defaults();
  const Fixture fx = make_fixture(cfg, 12, 4);
  const StatePanel panel = build_states(fx.histories, cfg, *fx.sys);
  CHECK(panel.dates == fx.dates);
  CHECK((panel.states - fx.states).cwiseAbs().maxCoeff() < 1e-12);

  cfg.sample_stride = 5;
  const StatePanel weekly = build_states(fx.histories, cfg, *fx.sys);
  REQUIRE(weekly.states.rows() == 3);
  CHECK(weekly.dates[1] == fx.dates[5]);
  CHECK(weekly.states.row(2) == panel.states.row(10));

  // Through the CSV format and back.
  std::stringstream io;
  save_history(io, fx.histories);
  const auto loaded = load_history(io, RunConfig::defaults());
  const StatePanel again = build_states(loaded, RunConfig::defaults(), *fx.sys);
  CHECK((again.states - fx.states).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.000123456789012345) == "-0.000123456789012");
  CHECK(format_number(1234567.0) == "1234567");
}
