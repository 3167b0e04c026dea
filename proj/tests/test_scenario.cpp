#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "schloegl/errors.hpp"
#include "schloegl/scenario.hpp"

using namespace schloegl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("schloegl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A short run that exercises every output file.
ScenarioConfig small_config(const std::string& controller) {
  ScenarioConfig c = parse_config(slurp(fs::path(SCHLOEGL_CONFIG_DIR) / ("rhc_sin_Cu30.json")));
  c.name = "small_" + controller;
  c.grid.n_nodes = 201;
  c.T = 1.0;
  c.dt = 1e-2;
  c.controller.kind = controller;
  c.controller.lambda = 0.01;
  c.output.snapshot_interval = 0.25;
  c.validate();
  return c;
}

}  // namespace

TEST_CASE("bundled configs validate and round-trip") {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(SCHLOEGL_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    CAPTURE(entry.path().string());
    const ScenarioConfig a = load_config(entry.path().string());
    const std::string text = serialize_config(a);
    const ScenarioConfig b = parse_config(text);
    CHECK(serialize_config(b) == text);
    CHECK(a.name == entry.path().stem().string());
    if (a.controller.kind == "explicit") {
      CHECK(a.controller.lambda > 0.0);
      CHECK(a.note.find("tuning") != std::string::npos);
    }
  }
  CHECK(count == 8);
}

TEST_CASE("invalid configs name the offending key") {
  const std::string good = slurp(fs::path(SCHLOEGL_CONFIG_DIR) / "explicit_target0_Cu30.json");
  CHECK_NOTHROW(parse_config(good));

  auto fails_with = [&](const std::string& from, const std::string& to, const std::string& key) {
    std::string text = good;
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, from.size(), to);
    try {
      parse_config(text);
      FAIL("accepted an invalid config: " << to);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  fails_with("\"lambda\": 0.01,", "", "controller.lambda");
  fails_with("\"lambda\": 0.01", "\"lambda\": -1.0", "controller.lambda");
  fails_with("\"norm\": \"linf\"", "\"norm\": \"l1\"", "controller.norm");
  fails_with("\"nu\": 0.1", "\"nu\": 0.1, \"mu\": 2", "grid.mu");
  fails_with("\"n_nodes\": 251", "\"n_nodes\": 2.5", "grid.n_nodes");
  fails_with("\"dt\": 0.001", "\"dt\": 0.0007", "time.T");
  fails_with("\"r\": 0.1", "\"r\": 1.5", "actuators.r");
  fails_with("\"kind\": \"zero\"", "\"kind\": \"square\"", "target.kind");
  fails_with("\"kind\": \"explicit\"", "\"kind\": \"pid\"", "controller.kind");
  fails_with("\"n_nodes\": 251", "\"n_nodes\": 41", "grid nodes");
  fails_with("cos(2*pi*x^2)", "cos(2*pi*x^2", "expression");
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

  ScenarioConfig c = parse_config(good);
  c.target.kind = "custom";
  c.target.expr = "sin(x)";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.target.expr = "cos(pi*x)*exp(-t)";
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("fine profile sets 1001 nodes and dt = 1e-4") {
  ScenarioConfig c = parse_config(slurp(fs::path(SCHLOEGL_CONFIG_DIR) / "free_target0.json"));
  apply_paper_profile(c);
  CHECK(c.grid.n_nodes == 1001);
  CHECK(c.dt == 1e-4);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("runs are byte-identical across repetitions") {
  const fs::path dir = scratch_dir("determinism");
  for (const std::string kind : {"free", "explicit", "rhc"}) {
    const ScenarioConfig c = small_config(kind);
    const RunSummary a = run_scenario(c, (dir / "a" / kind).string());
    const RunSummary b = run_scenario(c, (dir / "b" / kind).string());
    CHECK(a.exit_code == 0);
    CHECK(slurp(dir / "a" / kind / "trace.csv") == slurp(dir / "b" / kind / "trace.csv"));
    CHECK(slurp(dir / "a" / kind / "summary.json") == slurp(dir / "b" / kind / "summary.json"));
    CHECK(slurp(dir / "a" / kind / "snapshots.json") ==
          slurp(dir / "b" / kind / "snapshots.json"));
    CHECK(fs::exists(dir / "a" / kind / "windows.json") == (kind == "rhc"));
    if (kind == "rhc") CHECK(a.windows == 2);
  }
  fs::remove_all(dir);
}

TEST_CASE("trace files and comparison") {
  const fs::path dir = scratch_dir("compare");
  ScenarioConfig free = small_config("free");
  ScenarioConfig fb = small_config("explicit");
  free.output.trace_stride = 3;
  run_scenario(free, (dir / "free").string());
  run_scenario(fb, (dir / "fb").string());

  const TraceTable tf = read_trace_csv((dir / "free" / "trace.csv").string());
  const TraceTable te = read_trace_csv((dir / "fb" / "trace.csv").string());
  // Rows 0, 3, ..., 99 and the final row.
  CHECK(tf.t.size() == 35);
  CHECK(tf.t.back() == doctest::Approx(1.0));
  CHECK(te.t.size() == 101);
  CHECK(te.header.size() == 11);
  CHECK(te.header[4] == "u_1");

  const std::string self = compare_traces({te, te});
  std::istringstream rows(self);
  std::string line;
  std::getline(rows, line);
  CHECK(line.rfind("run,T,dt,final_normH", 0) == 0);
  while (std::getline(rows, line)) {
    CHECK(line.size() > 4);
    CHECK(line.substr(line.size() - 4) == ",0,0");
  }
  const std::string both = compare_traces({te, read_trace_csv((dir / "fb" / "trace.csv").string())});
  CHECK(both == self);
  CHECK(te.norm_h.back() < read_trace_csv((dir / "free" / "trace.csv").string()).norm_h.back());

  // Different dt.
  CHECK_THROWS_AS(compare_traces({te, tf}), ConfigError);
  ScenarioConfig longer = small_config("free");
  longer.T = 2.0;
  run_scenario(longer, (dir / "long").string());
  try {
    compare_traces({te, read_trace_csv((dir / "long" / "trace.csv").string())});
    FAIL("accepted traces of different length");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("T = ") != std::string::npos);
  }
  CHECK_THROWS_AS(read_trace_csv((dir / "missing.csv").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("blow-up keeps the partial trace") {
  const fs::path dir = scratch_dir("blowup");
  ScenarioConfig c = small_config("free");
  c.z0 = "60";
  c.dt = 0.1;
  c.output.snapshot_interval = 0.0;
  const RunSummary s = run_scenario(c, (dir / "run").string());
  CHECK(s.exit_code == 3);
  CHECK_FALSE(s.stabilized);
  CHECK(s.reached_time < 1.0);
  CHECK(s.error.find("t = ") != std::string::npos);
  const TraceTable t = read_trace_csv((dir / "run" / "trace.csv").string());
  CHECK(t.t.back() == doctest::Approx(s.reached_time));
  fs::remove_all(dir);
}

TEST_CASE("diagnostics report") {
  ScenarioConfig c = small_config("explicit");
  c.grid.n_nodes = 251;
  const std::string report = diagnose_json(c);
  CHECK(report.find("\"poincare_xi\"") != std::string::npos);
  CHECK(report.find("\"min_ratio\"") != std::string::npos);
  CHECK(report.find("\"time_order\"") != std::string::npos);
  // M = 8 is not resolved by 251 nodes at r = 0.1.
  CHECK(report.find("need at least 4") != std::string::npos);
}
